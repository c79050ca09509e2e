#include "ekb/cli.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ekb/aggregate.hpp"
#include "ekb/ensemble.hpp"
#include "ekb/error.hpp"
#include "ekb/io.hpp"
#include "ekb/kb.hpp"
#include "ekb/trainer.hpp"

namespace ekb::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct FitArgs {
  std::string kb_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  int members = 32;
  int dim = 0;
  double tau = 1e-2;
  double gamma = 1.0;
  double fit_tol = 1e-4;
  double learning_rate = TrainConfig{}.learning_rate;
  int max_epochs = TrainConfig{}.max_epochs;
  double init_scale = TrainConfig{}.init_scale;
  int retries = TrainConfig{}.retry_budget;
  double completion_rate = EnsembleOptions{}.completion_rate;
  int jobs = 1;
};

struct QueryArgs {
  std::string ensemble_path;
  std::string relation;
  std::string subject;
  std::string object;
  std::string kb_path;
  double delta = 0.0;
};

struct ReportArgs {
  std::string ensemble_path;
  std::string kb_path;
  double delta = 0.0;
  bool self_pairs = false;
};

struct AggregateArgs {
  std::string ensemble_path;
  std::string out_path;
  std::string clouds_path;
  double dedup_tol = 1e-6;
  double max_diameter = std::numeric_limits<double>::infinity();
};

struct Manifest {
  explicit Manifest(std::string name) : command(std::move(name)) {}

  std::string command;
  json parameters = json::object();
  std::string kb_digest;
  Clock::time_point start = Clock::now();

  [[nodiscard]] json finish() const {
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return {{"command", command},
            {"parameters", parameters},
            {"kb_digest", kb_digest},
            {"tool_version", std::string(kToolVersion)},
            {"rng_algorithm", std::string(kRngAlgorithm)},
            {"duration_seconds", seconds}};
  }
};

void emit_manifest(const Manifest& m, const std::string& path, std::ostream& err) {
  if (path.empty()) {
    err << "manifest: " << m.finish().dump() << '\n';
  } else {
    write_text(path, dump(m.finish()));
  }
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_fit(const FitArgs& a, const std::string& manifest_path, std::ostream& err) {
  Manifest manifest("fit");
  const KnowledgeBase kb = load_kb(a.kb_path);
  manifest.kb_digest = kb.digest();

  EmbeddingConfig cfg;
  cfg.positive_tolerance = a.tau;
  cfg.negative_margin = a.gamma;
  cfg.fit_tolerance = a.fit_tol;
  TrainConfig tcfg;
  tcfg.learning_rate = a.learning_rate;
  tcfg.max_epochs = a.max_epochs;
  tcfg.init_scale = a.init_scale;
  tcfg.retry_budget = a.retries;
  EnsembleOptions opts;
  opts.base_seed = *a.seed;
  opts.members = a.members;
  opts.completion_rate = a.completion_rate;
  opts.jobs = a.jobs;
  cfg.validate();
  tcfg.validate();
  opts.validate();

  bool searched = false;
  if (a.dim > 0) {
    cfg.dimension = a.dim;
  } else {
    try {
      cfg.dimension = min_dimension_search(kb, cfg, tcfg, opts.base_seed).dimension;
    } catch (const NoConvergentDimensionError& e) {
      err << "error: " << e.what() << '\n';
      return kComputeError;
    }
    searched = true;
  }

  Ensemble ens;
  try {
    ens = fit_ensemble(kb, cfg, tcfg, opts);
  } catch (const EnsembleFitError& e) {
    err << "error: " << e.what() << '\n';
    return kComputeError;
  }
  save_ensemble(ens, a.out_path);

  err << "dimension " << cfg.dimension << (searched ? " (searched)" : " (fixed)") << '\n';
  err << "members " << ens.size() << '\n';
  for (std::size_t i = 0; i < ens.size(); ++i) {
    err << "member " << i << " seed " << ens.reports[i].seed << " error " << std::setprecision(6)
        << ens.reports[i].final_error << " epochs " << ens.reports[i].epochs_used << '\n';
  }

  manifest.parameters = {{"kb", a.kb_path},
                         {"out", a.out_path},
                         {"seed", *a.seed},
                         {"members", a.members},
                         {"dimension", cfg.dimension},
                         {"dimension_searched", searched},
                         {"tau", a.tau},
                         {"gamma", a.gamma},
                         {"fit_tol", a.fit_tol},
                         {"learning_rate", a.learning_rate},
                         {"max_epochs", a.max_epochs},
                         {"init_scale", a.init_scale},
                         {"retries", a.retries},
                         {"completion_rate", a.completion_rate},
                         {"jobs", a.jobs}};
  emit_manifest(manifest, manifest_path.empty() ? a.out_path + ".manifest.json" : manifest_path, err);
  return kSuccess;
}

int cmd_query(const QueryArgs& a, const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  Manifest manifest("query");
  const Ensemble ens = load_ensemble(a.ensemble_path);
  manifest.kb_digest = ens.kb_digest;
  if (!a.kb_path.empty()) {
    ens.check_kb(load_kb(a.kb_path));
  }
  const TernaryVerdict v = query_truth(ens, {a.relation, a.subject, a.object}, {a.delta, std::nullopt});
  out << format_verdict(v) << '\n';
  manifest.parameters = {{"ensemble", a.ensemble_path}, {"relation", a.relation}, {"subject", a.subject},
                         {"object", a.object},          {"kb", a.kb_path},        {"delta", a.delta}};
  emit_manifest(manifest, manifest_path, err);
  return kSuccess;
}

int cmd_report(const ReportArgs& a, const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  Manifest manifest("report");
  const Ensemble ens = load_ensemble(a.ensemble_path);
  const KnowledgeBase kb = load_kb(a.kb_path);
  manifest.kb_digest = kb.digest();
  const KnowledgeReport report = knowledge_report(ens, kb, {a.self_pairs, a.delta});
  out << format_report(report);
  err << "asserted " << report.asserted.size() << (report.all_consistent() ? " (all consistent)" : " (INCONSISTENT)")
      << ", unstated " << report.unstated.size() << ": true " << report.true_count << ", false "
      << report.false_count << ", unknown " << report.unknown_count << '\n';
  manifest.parameters = {
      {"ensemble", a.ensemble_path}, {"kb", a.kb_path}, {"delta", a.delta}, {"self_pairs", a.self_pairs}};
  emit_manifest(manifest, manifest_path, err);
  return kSuccess;
}

int cmd_aggregate(const AggregateArgs& a, const std::string& manifest_path, std::ostream& err) {
  Manifest manifest("aggregate");
  const Ensemble ens = load_ensemble(a.ensemble_path);
  manifest.kb_digest = ens.kb_digest;
  AggregateConfig cfg{a.dedup_tol, a.max_diameter};
  cfg.validate();
  AggregateModel agg;
  try {
    agg = build_aggregate(ens, cfg);
  } catch (const DegenerateAggregateError& e) {
    err << "error: " << e.what() << '\n';
    return kComputeError;
  }
  write_text(a.out_path, dump(to_json(agg)));
  if (!a.clouds_path.empty()) {
    write_text(a.clouds_path, format_clouds(agg));
  }
  double widest = 0.0;
  for (const auto& [term, d] : agg.diameters) {
    widest = std::max(widest, d);
  }
  err << "retained " << agg.members.size() << " of " << ens.size() << " members\n";
  err << "max diameter " << std::setprecision(6) << widest << '\n';
  manifest.parameters = {{"ensemble", a.ensemble_path},
                         {"out", a.out_path},
                         {"clouds", a.clouds_path},
                         {"dedup_tol", a.dedup_tol},
                         {"max_diameter", finite_or_null(a.max_diameter)}};
  emit_manifest(manifest, manifest_path.empty() ? a.out_path + ".manifest.json" : manifest_path, err);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string_view>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensembles of translational knowledge-base embeddings with three-valued queries", "ekb"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  std::string manifest_path;
  app.add_flag("--version", show_version, "Print tool and RNG algorithm identifiers");
  app.add_option("--manifest", manifest_path, "Write the run manifest here");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an ensemble to a KB file");
  fit_cmd->add_option("kb", fit.kb_path, "KB file")->required();
  fit_cmd->add_option("-o,--out", fit.out_path, "Ensemble JSON output")->required();
  fit_cmd->add_option("--seed", fit.seed, "Base seed")->required();
  fit_cmd->add_option("--members", fit.members, "Ensemble size")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--dim", fit.dim, "Fixed dimension (skips the search)")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--tau", fit.tau, "Satisfaction radius")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--gamma", fit.gamma, "Negative margin")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--fit-tol", fit.fit_tol, "Convergence tolerance")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--lr", fit.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-epochs", fit.max_epochs, "Epoch limit per attempt")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--init-scale", fit.init_scale, "Initialization half-width")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--retries", fit.retries, "Reseeded attempts per seed")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--completion-rate", fit.completion_rate, "Per-fact completion probability")
      ->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--jobs", fit.jobs, "Worker threads")->check(CLI::PositiveNumber);

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "Three-valued verdict for one triple");
  query_cmd->add_option("ensemble", query.ensemble_path, "Ensemble JSON")->required();
  query_cmd->add_option("relation", query.relation)->required();
  query_cmd->add_option("subject", query.subject)->required();
  query_cmd->add_option("object", query.object)->required();
  query_cmd->add_option("--kb", query.kb_path, "Check the ensemble was fitted on this KB");
  query_cmd->add_option("--delta", query.delta, "Quorum slack")->check(CLI::Range(0.0, 0.5));

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Verdicts for every asserted and unstated triple");
  report_cmd->add_option("ensemble", report.ensemble_path, "Ensemble JSON")->required();
  report_cmd->add_option("kb", report.kb_path, "KB file the ensemble was fitted on")->required();
  report_cmd->add_option("--delta", report.delta, "Quorum slack")->check(CLI::Range(0.0, 0.5));
  report_cmd->add_flag("--self-pairs", report.self_pairs, "Include r(a, a) among unstated queries");

  AggregateArgs aggregate;
  auto* agg_cmd = app.add_subcommand("aggregate", "Build the aggregate cloud model");
  agg_cmd->add_option("ensemble", aggregate.ensemble_path, "Ensemble JSON")->required();
  agg_cmd->add_option("-o,--out", aggregate.out_path, "Aggregate JSON output")->required();
  agg_cmd->add_option("--clouds", aggregate.clouds_path, "Also write a TSV cloud dump");
  agg_cmd->add_option("--dedup-tol", aggregate.dedup_tol, "Affine duplicate tolerance")
      ->check(CLI::NonNegativeNumber);
  agg_cmd->add_option("--max-diameter", aggregate.max_diameter, "Cloud diameter cap")
      ->check(CLI::NonNegativeNumber);

  std::vector<std::string> storage(args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) {
    argv.push_back(s.data());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kInputError;
  }

  if (show_version) {
    out << "ekb " << kToolVersion << '\n' << "rng " << kRngAlgorithm << '\n';
    return kSuccess;
  }

  try {
    if (*fit_cmd) {
      return cmd_fit(fit, manifest_path, err);
    }
    if (*query_cmd) {
      return cmd_query(query, manifest_path, out, err);
    }
    if (*report_cmd) {
      return cmd_report(report, manifest_path, out, err);
    }
    if (*agg_cmd) {
      return cmd_aggregate(aggregate, manifest_path, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  err << app.help();
  return kInputError;
}

}  // namespace ekb::cli
