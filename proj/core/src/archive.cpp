#include "anovagp/archive.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "anovagp/errors.hpp"

namespace anovagp {
namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json mat_to_json(const Eigen::MatrixXd& m) {
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Eigen::MatrixXd mat_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("archive: matrix payload size mismatch");
  }
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

json index_to_json(const AnovaIndex& t) { return json(t.coords()); }
AnovaIndex index_from_json(const json& j) { return AnovaIndex(j.get<std::vector<std::size_t>>()); }

// -infinity (pinned zero jitter) is not representable in JSON-family formats.
json log_value_to_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }
double log_value_from_json(const json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

json pca_to_json(const PcaModel& p) {
  return json{{"mean", vec_to_json(p.mean)},
              {"components", mat_to_json(p.components)},
              {"eigenvalues", vec_to_json(p.eigenvalues)},
              {"total_variance", p.total_variance}};
}

PcaModel pca_from_json(const json& j) {
  PcaModel p;
  p.mean = vec_from_json(j.at("mean"));
  p.components = mat_from_json(j.at("components"));
  p.eigenvalues = vec_from_json(j.at("eigenvalues"));
  p.total_variance = j.at("total_variance").get<double>();
  return p;
}

json gp_to_json(const GpModel& g) {
  const Hyperparameters& h = g.hyper();
  return json{{"inputs", mat_to_json(g.inputs())},
              {"targets", vec_to_json(g.targets())},
              {"log_sq_lengths", vec_to_json(h.log_sq_lengths)},
              {"log_signal_var", h.log_signal_var},
              {"log_jitter_var", log_value_to_json(h.log_jitter_var)}};
}

GpModel gp_from_json(const json& j) {
  Hyperparameters h{vec_from_json(j.at("log_sq_lengths")), j.at("log_signal_var").get<double>(),
                    log_value_from_json(j.at("log_jitter_var"))};
  return GpModel(mat_from_json(j.at("inputs")), vec_from_json(j.at("targets")), std::move(h));
}

json gps_to_json(const std::vector<GpModel>& gps) {
  json arr = json::array();
  for (const auto& g : gps) arr.push_back(gp_to_json(g));
  return arr;
}

std::vector<GpModel> gps_from_json(const json& j) {
  std::vector<GpModel> gps;
  for (const auto& g : j) gps.push_back(gp_from_json(g));
  return gps;
}

json selection_to_json(const IndexSelection& s) {
  json orders = json::array();
  for (const auto& level : s.selected) {
    json l = json::array();
    for (const auto& t : level) l.push_back(index_to_json(t));
    orders.push_back(l);
  }
  json weights = json::array();
  for (const auto& [t, w] : s.weights) weights.push_back(json{{"index", index_to_json(t)}, {"weight", w}});
  return json{{"selected", orders}, {"candidate_counts", s.candidate_counts}, {"weights", weights}};
}

IndexSelection selection_from_json(const json& j) {
  IndexSelection s;
  for (const auto& level : j.at("selected")) {
    std::vector<AnovaIndex> l;
    for (const auto& t : level) l.push_back(index_from_json(t));
    s.selected.push_back(std::move(l));
  }
  s.candidate_counts = j.at("candidate_counts").get<std::vector<std::size_t>>();
  for (const auto& w : j.at("weights")) {
    s.weights[index_from_json(w.at("index"))] = w.at("weight").get<double>();
  }
  return s;
}

json header(const char* schema) { return json{{"schema", schema}, {"version", kArchiveVersion}}; }

json parse(const std::vector<std::uint8_t>& bytes, const char* expected_schema) {
  json doc;
  try {
    doc = json::from_cbor(bytes);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("archive: not a valid CBOR document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema")) throw std::runtime_error("archive: missing schema tag");
  if (expected_schema && doc.at("schema").get<std::string>() != expected_schema) {
    throw std::runtime_error("archive: expected schema " + std::string(expected_schema) + ", found " +
                             doc.at("schema").get<std::string>());
  }
  const int version = doc.at("version").get<int>();
  if (version != kArchiveVersion) {
    throw std::runtime_error("archive: unsupported version " + std::to_string(version));
  }
  return doc;
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("archive: cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("archive: write to " + path.string() + " failed");
}

}  // namespace

std::vector<std::uint8_t> encode(const AnovaGpEmulator& emulator) {
  json doc = header(kAnovaGpSchema);
  doc["selection"] = selection_to_json(emulator.selection());
  doc["anchor"] = vec_to_json(emulator.anchor().c);
  doc["anchor_output"] = vec_to_json(emulator.anchor_output());
  json locals = json::array();
  for (const auto& [t, local] : emulator.locals()) {
    locals.push_back(json{{"index", index_to_json(t)},
                          {"pca", pca_to_json(local.pca)},
                          {"mode_gps", gps_to_json(local.mode_gps)},
                          {"train_inputs", mat_to_json(local.train_inputs)},
                          {"train_outputs", mat_to_json(local.train_outputs)},
                          {"initial_size", local.initial_size}});
  }
  doc["locals"] = std::move(locals);
  return json::to_cbor(doc);
}

std::vector<std::uint8_t> encode(const SgpEmulator& emulator) {
  json doc = header(kSgpSchema);
  doc["pca"] = pca_to_json(emulator.pca);
  doc["mode_gps"] = gps_to_json(emulator.mode_gps);
  doc["train_inputs"] = mat_to_json(emulator.train_inputs);
  return json::to_cbor(doc);
}

AnovaGpEmulator decode_anova_gp(const std::vector<std::uint8_t>& bytes) {
  const json doc = parse(bytes, kAnovaGpSchema);
  std::map<AnovaIndex, LocalGpEmulator, IndexLess> locals;
  for (const auto& j : doc.at("locals")) {
    LocalGpEmulator local;
    local.index = index_from_json(j.at("index"));
    local.pca = pca_from_json(j.at("pca"));
    local.mode_gps = gps_from_json(j.at("mode_gps"));
    local.train_inputs = mat_from_json(j.at("train_inputs"));
    local.train_outputs = mat_from_json(j.at("train_outputs"));
    local.initial_size = j.at("initial_size").get<std::size_t>();
    AnovaIndex key = local.index;
    locals.emplace(std::move(key), std::move(local));
  }
  return AnovaGpEmulator(selection_from_json(doc.at("selection")), AnchorPoint{vec_from_json(doc.at("anchor"))},
                         vec_from_json(doc.at("anchor_output")), std::move(locals));
}

SgpEmulator decode_sgp(const std::vector<std::uint8_t>& bytes) {
  const json doc = parse(bytes, kSgpSchema);
  SgpEmulator sgp;
  sgp.pca = pca_from_json(doc.at("pca"));
  sgp.mode_gps = gps_from_json(doc.at("mode_gps"));
  sgp.train_inputs = mat_from_json(doc.at("train_inputs"));
  return sgp;
}

EmulatorKind archive_kind(const std::vector<std::uint8_t>& bytes) {
  const json doc = parse(bytes, nullptr);
  const auto schema = doc.at("schema").get<std::string>();
  if (schema == kAnovaGpSchema) return EmulatorKind::AnovaGp;
  if (schema == kSgpSchema) return EmulatorKind::Sgp;
  throw std::runtime_error("archive: unknown schema " + schema);
}

void save_emulator(const AnovaGpEmulator& emulator, const std::filesystem::path& path) {
  write_bytes(encode(emulator), path);
}

void save_emulator(const SgpEmulator& emulator, const std::filesystem::path& path) {
  write_bytes(encode(emulator), path);
}

std::vector<std::uint8_t> read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("archive: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace anovagp
