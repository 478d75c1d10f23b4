// anovagp command-line front end.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "anovagp/anova.hpp"
#include "anovagp/archive.hpp"
#include "anovagp/config.hpp"
#include "anovagp/emulator.hpp"
#include "anovagp/errors.hpp"
#include "anovagp/experiment.hpp"
#include "anovagp/sim_cache.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace anovagp;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitBadConfig = 2;

enum class Format { Csv, Json };

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string emulator;
  Format format = Format::Csv;
  std::string method = "anova-gp";
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// RFC 4180 quoting: only fields containing a separator, quote or newline.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void report_error(const std::string& kind, const std::string& message,
                  const std::optional<std::string>& stage = std::nullopt) {
  json rec{{"error", kind}, {"message", message}};
  if (stage) rec["stage"] = *stage;
  std::cerr << rec.dump() << '\n';
}

ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig config = args.config.empty() ? ExperimentConfig{} : load_config(args.config);
  if (args.seed) config.seed = *args.seed;
  if (const auto problems = validate(config); !problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  return config;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

json order_json(const IndexSelection& selection) {
  json rows = json::array();
  for (const auto& r : order_table(selection)) {
    rows.push_back({{"order", r.order}, {"candidates", r.candidates}, {"selected", r.selected}});
  }
  return rows;
}

std::string decomposition_text(const Decomposition& dec, Format format) {
  const auto& sel = dec.selection;
  if (format == Format::Json) {
    json terms = json::array();
    for (const auto& [t, w] : sel.weights) {
      terms.push_back({{"index", t.to_string()}, {"weight", w}, {"selected", sel.contains(t)}});
    }
    return json{{"orders", order_json(sel)}, {"candidates", terms}}.dump(2) + "\n";
  }
  std::string out = "index,order,weight,selected\n";
  for (const auto& [t, w] : sel.weights) {
    out += csv_field(t.to_string()) + ',' + std::to_string(t.order()) + ',' + fmt_double(w) + ',' +
           (sel.contains(t) ? "1" : "0") + '\n';
  }
  return out;
}

int cmd_decompose(const CommonArgs& args) {
  const ExperimentConfig config = load(args);
  SimCache cache(make_simulator(config.problem));
  const auto anchor = AnchorPoint::mean_of(cache.simulator().inputs());
  const Decomposition dec = adaptive_decompose(cache, anchor, decompose_options(config));
  const std::string text = decomposition_text(dec, args.format);
  std::cout << text;
  if (!args.out.empty()) {
    write_file(fs::path(args.out) / (args.format == Format::Json ? "decomposition.json"
                                                                  : "decomposition.csv"),
               text);
  }
  std::cerr << "simulator calls: " << cache.misses() << '\n';
  return 0;
}

int cmd_train(const CommonArgs& args) {
  const ExperimentConfig config = load(args);
  const fs::path out = args.out.empty() ? fs::path(config.output_dir) : fs::path(args.out);
  const SimulatorPtr sim = make_simulator(config.problem);
  const StageSeeds seeds = stage_seeds(config.seed);
  if (args.method == "s-gp") {
    SgpOptions opts;
    opts.n_train = config.sgp_n;
    opts.tol_pca = config.tol_pca;
    opts.gp = gp_options(config.sgp_gp, seeds.sgp_gp);
    opts.seed = seeds.sgp_samples;
    if (config.sgp_budget == SgpBudgetRule::Matched) {
      throw ConfigError("train --method s-gp needs sgp.budget: fixed with sgp.n set");
    }
    const SgpEmulator sgp = train_sgp(*sim, opts);
    save_emulator(sgp, out / "sgp.emu");
    std::cout << "s-gp: " << opts.n_train << " samples, " << sgp.rank() << " modes -> "
              << (out / "sgp.emu").string() << '\n';
    return 0;
  }
  SimCache cache(sim);
  AnovaGpOptions opts;
  opts.decompose = decompose_options(config);
  opts.local.n_train = config.n_train;
  opts.local.pool_size = config.pool_size;
  opts.local.tol_pca = config.tol_pca;
  opts.local.gp = gp_options(config.local_gp, seeds.local_gp);
  opts.local.seed = seeds.pools;
  opts.threads = config.threads;
  const AnovaGpBuild build = build_anova_gp(cache, AnchorPoint::mean_of(sim->inputs()), opts);
  save_emulator(build.emulator, out / "anova_gp.emu");
  std::cout << "anova-gp: " << build.emulator.locals().size() << " terms, " << cache.misses()
            << " simulator calls -> " << (out / "anova_gp.emu").string() << '\n';
  return 0;
}

Eigen::MatrixXd read_points(const std::string& path) {
  if (path.empty()) throw ConfigError("predict needs --config <points file>");
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  const YAML::Node pts = doc["points"];
  if (!pts || !pts.IsSequence() || pts.size() == 0) {
    throw ConfigError(path + ": expected a nonempty 'points' list");
  }
  const std::size_t m = pts[0].size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (!pts[j].IsSequence() || pts[j].size() != m) {
      throw ConfigError(path + ": point " + std::to_string(j) + " has the wrong length");
    }
    for (std::size_t i = 0; i < m; ++i) {
      try {
        out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = pts[j][i].as<double>();
      } catch (const YAML::Exception&) {
        throw ConfigError(path + ": point " + std::to_string(j) + " has a non-numeric entry");
      }
    }
  }
  return out;
}

int cmd_predict(const CommonArgs& args) {
  if (args.emulator.empty()) throw ConfigError("predict needs --emulator <archive>");
  const auto bytes = read_archive(args.emulator);
  const Eigen::MatrixXd points = read_points(args.config);
  const bool is_anova = archive_kind(bytes) == EmulatorKind::AnovaGp;
  std::optional<AnovaGpEmulator> agp;
  std::optional<SgpEmulator> sgp;
  std::size_t m = 0;
  if (is_anova) {
    agp = decode_anova_gp(bytes);
    m = agp->input_dim();
  } else {
    sgp = decode_sgp(bytes);
    m = static_cast<std::size_t>(sgp->train_inputs.cols());
  }
  if (static_cast<std::size_t>(points.cols()) != m) {
    throw ConfigError("points have dimension " + std::to_string(points.cols()) +
                      " but the emulator expects " + std::to_string(m));
  }

  std::vector<Eigen::VectorXd> means;
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    const Eigen::VectorXd xi = points.row(j).transpose();
    means.push_back(is_anova ? agp->predict_mean(xi) : sgp->predict_mean(xi));
  }

  std::ostringstream os;
  if (args.format == Format::Json) {
    json rows = json::array();
    for (const auto& mu : means) rows.push_back(std::vector<double>(mu.data(), mu.data() + mu.size()));
    os << json{{"mean", rows}}.dump() << '\n';
  } else {
    os << "point";
    const Eigen::Index d = means.front().size();
    for (Eigen::Index k = 1; k <= d; ++k) os << ",u" << k;
    os << '\n';
    for (std::size_t j = 0; j < means.size(); ++j) {
      os << j;
      for (Eigen::Index k = 0; k < d; ++k) os << ',' << fmt_double(means[j](k));
      os << '\n';
    }
  }
  if (args.out.empty()) {
    std::cout << os.str();
  } else {
    write_file(fs::path(args.out) / (args.format == Format::Json ? "predictions.json"
                                                                  : "predictions.csv"),
               os.str());
  }
  return 0;
}

int cmd_benchmark(const CommonArgs& args) {
  const ExperimentConfig config = load(args);
  const fs::path out = args.out.empty() ? fs::path(config.output_dir) : fs::path(args.out);
  const ExperimentArtifacts art = run_experiment(config, out);
  const auto& rep = art.report;
  if (args.format == Format::Json) {
    std::cout << report_json(rep);
    return 0;
  }
  std::cout << "order,candidates,selected\n";
  for (const auto& r : rep.orders) {
    std::cout << r.order << ',' << r.candidates << ',' << r.selected << '\n';
  }
  std::cout << "\nmethod,min,q1,median,q3,max,undefined\n";
  for (const auto& m : rep.methods) {
    const auto& s = m.summary;
    std::cout << m.method << ',' << fmt_double(s.min) << ',' << fmt_double(s.q1) << ','
              << fmt_double(s.median) << ',' << fmt_double(s.q3) << ',' << fmt_double(s.max) << ','
              << m.undefined << '\n';
  }
  std::cout << "\nartifacts written to " << out.string() << '\n';
  return 0;
}

int cmd_inspect(const CommonArgs& args) {
  if (args.emulator.empty()) throw ConfigError("inspect needs --emulator <archive>");
  const auto bytes = read_archive(args.emulator);
  if (archive_kind(bytes) == EmulatorKind::Sgp) {
    const SgpEmulator sgp = decode_sgp(bytes);
    if (args.format == Format::Json) {
      std::cout << json{{"kind", "s-gp"},
                        {"n_train", sgp.train_inputs.rows()},
                        {"input_dim", sgp.train_inputs.cols()},
                        {"output_dim", sgp.pca.output_dim()},
                        {"pca_modes", sgp.rank()}}
                       .dump(2)
                << '\n';
    } else {
      std::cout << "kind,n_train,input_dim,output_dim,pca_modes\ns-gp," << sgp.train_inputs.rows()
                << ',' << sgp.train_inputs.cols() << ',' << sgp.pca.output_dim() << ','
                << sgp.rank() << '\n';
    }
    return 0;
  }
  const AnovaGpEmulator emu = decode_anova_gp(bytes);
  const auto rows = term_table(emu);
  if (args.format == Format::Json) {
    json terms = json::array();
    for (const auto& r : rows) {
      terms.push_back({{"index", r.index.to_string()},
                       {"weight", r.weight},
                       {"pca_modes", r.modes},
                       {"training_size", r.training_size}});
    }
    std::cout << json{{"kind", "anova-gp"},
                      {"input_dim", emu.input_dim()},
                      {"output_dim", emu.output_dim()},
                      {"orders", order_json(emu.selection())},
                      {"terms", terms}}
                     .dump(2)
              << '\n';
    return 0;
  }
  std::cout << "index,weight,pca_modes,training_size\n";
  for (const auto& r : rows) {
    std::cout << csv_field(r.index.to_string()) << ',' << fmt_double(r.weight) << ',' << r.modes
              << ',' << r.training_size << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ANOVA-GP surrogate modelling for parametric simulators"};
  app.require_subcommand(1);
  CommonArgs args;

  const std::map<std::string, Format> formats{{"csv", Format::Csv}, {"json", Format::Json}};
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", args.format, "Output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "Experiment config (YAML or JSON)");
    sub->add_option("--seed", args.seed, "Override the master seed");
    sub->add_option("--out", args.out, "Output directory");
    add_format(sub);
  };

  auto* decompose = app.add_subcommand("decompose", "Adaptive anchored ANOVA decomposition");
  add_run_flags(decompose);
  auto* train = app.add_subcommand("train", "Train an emulator and write its archive");
  add_run_flags(train);
  train->add_option("--method", args.method, "anova-gp or s-gp")
      ->check(CLI::IsMember({"anova-gp", "s-gp"}));
  auto* predict = app.add_subcommand("predict", "Predictive means at the points of a file");
  predict->add_option("--emulator", args.emulator, "Emulator archive")->required();
  predict->add_option("--config", args.config, "Points file with a 'points' list");
  predict->add_option("--out", args.out, "Output directory (default: stdout)");
  add_format(predict);
  auto* benchmark = app.add_subcommand("benchmark", "ANOVA-GP vs S-GP comparison run");
  add_run_flags(benchmark);
  auto* inspect = app.add_subcommand("inspect", "Print the term table of an archive");
  inspect->add_option("--emulator", args.emulator, "Emulator archive")->required();
  add_format(inspect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kExitBadConfig;
  }

  try {
    if (*decompose) return cmd_decompose(args);
    if (*train) return cmd_train(args);
    if (*predict) return cmd_predict(args);
    if (*benchmark) return cmd_benchmark(args);
    if (*inspect) return cmd_inspect(args);
  } catch (const ConfigError& e) {
    report_error("config", e.what());
    return kExitBadConfig;
  } catch (const SimulatorError& e) {
    report_error("simulator", e.what());
    return kExitFailure;
  } catch (const Error& e) {
    report_error("anovagp", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
