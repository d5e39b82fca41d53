#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "qiblab/io.hpp"
#include "support.hpp"

using namespace qiblab;
using namespace qiblab::testing;

namespace {

std::string data(const char* name) { return std::string(QIBLAB_DATA_DIR) + "/" + name; }

}  // namespace

TEST_CASE("bundled configurations load") {
  for (const char* e : {"toy1q_ensemble.json", "toy2q_ensemble.json"}) CHECK_NOTHROW(ensemble_from_json(read_json_file(data(e))));
  for (const char* c : {"toy1q_channel.json", "toy2q_channel.json", "depolarizing_channel.json", "identity_channel.json"})
    CHECK_NOTHROW(channel_from_json(read_json_file(data(c))));
  const ParameterizedChannel ch = channel_from_json(read_json_file(data("toy2q_channel.json")));
  CHECK(ch.in_dim() == 4);
  CHECK(ch.out_dim() == 2);
  CHECK(ch.parameter_count() == 5);
}

TEST_CASE("depolarizing toy evaluates to zero") {
  const QibInstance inst(ensemble_from_json(read_json_file(data("toy1q_ensemble.json"))),
                         channel_from_json(read_json_file(data("depolarizing_channel.json"))), 0.5);
  CHECK(std::abs(qib_objective(inst)) < 1e-10);
}

TEST_CASE("ensemble parsing") {
  const Json j = Json::parse(R"({"dim_label": 3, "records": [
    {"state": [1, 0], "label": 0, "weight": 0.5},
    {"state": [[0.6, 0], [0, 0.8]], "label": 2, "weight": 0.5}]})");
  const LabeledEnsemble e = ensemble_from_json(j);
  CHECK(e.layout().dim_label == 3);
  CHECK(e.records()[1].tag == 1);
  CHECK(e.records()[1].state(1) == cplx(0, 0.8));

  CHECK_THROWS_AS(ensemble_from_json(Json::parse(R"({"records": [{"state": [1, 0], "weight": 1}]})")), ValidationError);
  CHECK_THROWS_AS(ensemble_from_json(Json::parse(R"({"records": [{"state": ["a"], "label": 0, "weight": 1}]})")),
                  ValidationError);
  CHECK_NOTHROW(ensemble_from_json(Json::parse(R"({"normalize": true, "records": [{"state": [1, 1], "label": 0, "weight": 1}]})")));
}

TEST_CASE("channel parsing") {
  const Json j = Json::parse(R"({"data_qubits": 1, "env_qubits": 1,
    "generators": ["XY", [["XX", 1.0], ["ZI", 0.5]]], "parameters": [0.1, 0.2]})");
  const ParameterizedChannel ch = channel_from_json(j);
  CHECK(ch.discard_dim() == 2);
  CHECK(max_abs(ch.generators()[1].matrix() - pauli_string_matrix("XX") - 0.5 * pauli_string_matrix("ZI")) < 1e-15);

  try {
    channel_from_json(Json::parse(R"({"data_qubits": 1, "env_qubits": 1, "generators": ["X"]})"));
    FAIL("expected a width error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == "dimension_mismatch");
  }
  CHECK_THROWS_AS(channel_from_json(Json::parse(R"({"data_qubits": 1, "discard_qubits": 2, "generators": []})")), ValidationError);
  CHECK_THROWS_AS(channel_from_json(Json::parse(R"({"data_qubits": 1, "generators": ["X"], "parameters": [1, 2]})")), ValidationError);
}

TEST_CASE("file errors") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/qiblab.json"), IoError);
  const auto tmp = std::filesystem::temp_directory_path() / "qiblab_bad.json";
  write_text_file(tmp.string(), "{not json");
  try {
    read_json_file(tmp.string());
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(e.code() == "parse");
  }
  std::filesystem::remove(tmp);
  CHECK_THROWS_AS(write_text_file("/nonexistent/dir/out.csv", "x"), IoError);
}

TEST_CASE("JSON reports") {
  const Json p = to_json(plan_parameters(1e-2, 0.25, 1.0));
  CHECK(p["K"] == 30);
  CHECK(p["L"] == 285);
  CHECK(p["M"] == 48);

  const Json w = error_to_json(WindowError("below window", 0.05));
  CHECK(w["error"]["kind"] == "numeric_precondition");
  CHECK(w["error"]["code"] == "window_violation");
  CHECK(w["error"]["eigenvalue"] == 0.05);
  CHECK(error_to_json(IoError("x"))["error"]["kind"] == "io");

  EstimateReport r;
  r.budget = {{"a", 0.25}, {"b", 0.5}};
  CHECK(to_json(r)["budget"]["total"] == 0.75);
}
