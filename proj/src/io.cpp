#include "qiblab/io.hpp"

#include <fstream>
#include <sstream>

namespace qiblab {

namespace {

template <class T>
T get_field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + "missing field '" + key + "'", "config");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(where + "field '" + key + "' has the wrong type", "config");
  }
}

cplx amplitude(const Json& a, const std::string& where) {
  if (a.is_number()) return a.get<double>();
  if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) return {a[0].get<double>(), a[1].get<double>()};
  throw ValidationError(where + "amplitudes must be numbers or [re, im] pairs", "config");
}

Index qubit_dim(int qubits, const char* name) {
  if (qubits < 0 || qubits > 8) throw ValidationError(std::string(name) + " must lie in [0, 8]", "config");
  return Index{1} << qubits;
}

}  // namespace

LabeledEnsemble ensemble_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("records") || !j["records"].is_array())
    throw ValidationError("ensemble must be an object with a 'records' array", "config");
  const bool normalize = j.value("normalize", false);
  std::vector<EnsembleRecord> records;
  for (std::size_t r = 0; r < j["records"].size(); ++r) {
    const Json& jr = j["records"][r];
    const std::string where = "record " + std::to_string(r) + ": ";
    EnsembleRecord rec;
    rec.tag = j["records"][r].value("tag", static_cast<Index>(r));
    rec.label = get_field<Index>(jr, "label", where);
    rec.weight = get_field<double>(jr, "weight", where);
    if (!jr.contains("state") || !jr["state"].is_array()) throw ValidationError(where + "missing 'state' array", "config");
    rec.state.resize(static_cast<Index>(jr["state"].size()));
    for (std::size_t i = 0; i < jr["state"].size(); ++i) rec.state(static_cast<Index>(i)) = amplitude(jr["state"][i], where);
    if (normalize && rec.state.norm() > 0.0) rec.state.normalize();
    records.push_back(std::move(rec));
  }
  return LabeledEnsemble(std::move(records), j.value("dim_tag", Index{0}), j.value("dim_label", Index{0}));
}

ParameterizedChannel channel_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("channel must be a JSON object", "config");
  const int data_q = get_field<int>(j, "data_qubits", "channel: ");
  const int env_q = j.value("env_qubits", 0);
  const int discard_q = j.value("discard_qubits", env_q);
  if (data_q < 1) throw ValidationError("channel: data_qubits must be >= 1", "config");
  if (discard_q > data_q + env_q) throw ValidationError("channel: cannot discard more qubits than it holds", "config");
  const Index in_dim = qubit_dim(data_q, "data_qubits");
  const Index anc_dim = qubit_dim(env_q, "env_qubits");
  const Index discard_dim = qubit_dim(discard_q, "discard_qubits");
  const int width = data_q + env_q;

  std::vector<HermitianOperator> gens;
  if (!j.contains("generators") || !j["generators"].is_array()) throw ValidationError("channel: missing 'generators' array", "config");
  for (std::size_t g = 0; g < j["generators"].size(); ++g) {
    const Json& jg = j["generators"][g];
    const std::string where = "channel generator " + std::to_string(g) + ": ";
    std::vector<std::pair<std::string, double>> terms;
    if (jg.is_string()) {
      terms.emplace_back(jg.get<std::string>(), 1.0);
    } else if (jg.is_array()) {
      for (const Json& t : jg) {
        if (!t.is_array() || t.size() != 2 || !t[0].is_string() || !t[1].is_number())
          throw ValidationError(where + "terms must be [label, coefficient] pairs", "config");
        terms.emplace_back(t[0].get<std::string>(), t[1].get<double>());
      }
    } else {
      throw ValidationError(where + "must be a Pauli label or a list of terms", "config");
    }
    for (const auto& [label, c] : terms)
      if (static_cast<int>(label.size()) != width)
        throw ValidationError(where + "label '" + label + "' does not span " + std::to_string(width) + " qubits", "dimension_mismatch");
    gens.push_back(pauli_sum(terms));
  }
  std::vector<double> params = j.contains("parameters") ? get_field<std::vector<double>>(j, "parameters", "channel: ")
                                                         : std::vector<double>(gens.size(), 0.0);
  return ParameterizedChannel(std::move(gens), std::move(params), in_dim, anc_dim, discard_dim);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what(), "parse");
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

Json to_json(const PlanBounds& p) {
  Json j;
  j["epsilon"] = p.epsilon;
  j["lambda_min"] = p.lambda_min;
  j["deriv_norm"] = p.deriv_norm;
  j["K"] = p.K;
  j["L"] = p.L;
  j["M"] = p.M;
  j["n"] = p.samples;
  j["harmonic_K"] = p.harmonic;
  j["lambert_argument"] = p.lambert_argument;
  j["L_raw"] = p.L_raw;
  j["derivative_error_bound"] = derivative_error_bound(p.K, p.L, p.M, p.lambda_min, p.deriv_norm);
  j["value_error_bound"] = value_error_bound(p.K, p.L, p.M, p.lambda_min);
  return j;
}

Json to_json(const EstimateReport& r) {
  Json j;
  j["estimator"] = r.estimator;
  j["value"] = r.value;
  j["mode"] = to_string(r.mode);
  j["duhamel"] = to_string(r.duhamel);
  j["samples"] = r.samples;
  j["repeats"] = r.repeats;
  j["claimed_stddev"] = r.claimed_stddev;
  j["empirical_stddev"] = r.empirical_stddev;
  j["repeat_values"] = r.repeat_values;
  Json b = Json::object();
  double total = 0.0;
  for (const auto& [k, v] : r.budget) {
    b[k] = v;
    total += v;
  }
  b["total"] = total;
  j["budget"] = b;
  return j;
}

Json to_json(const InfoPlaneTrajectory& t) {
  Json j;
  j["schema"] = "qiblab-trajectory v1";
  j["status"] = t.status;
  Json recs = Json::array();
  for (const auto& r : t.records) {
    Json jr;
    jr["step"] = r.step;
    jr["alpha"] = r.alpha;
    jr["beta"] = r.beta;
    jr["loss"] = r.loss;
    jr["I_RX"] = r.memory;
    jr["I_XY"] = r.relevant;
    jr["gradnorm"] = r.grad_norm;
    jr["step_size"] = r.step_size;
    recs.push_back(jr);
  }
  j["records"] = recs;
  return j;
}

Json error_to_json(const Error& e) {
  const char* kind = e.kind() == ErrorKind::Validation ? "validation" : e.kind() == ErrorKind::Io ? "io" : "numeric_precondition";
  Json j;
  j["error"] = {{"kind", kind}, {"code", e.code()}, {"message", e.what()}};
  if (const auto* w = dynamic_cast<const WindowError*>(&e)) j["error"]["eigenvalue"] = w->eigenvalue();
  return j;
}

}  // namespace qiblab
