#include "ekb/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ekb/error.hpp"

namespace ekb {

namespace {

json polarity_json(Polarity p) { return p == Polarity::Positive ? "+" : "-"; }

Polarity polarity_from_json(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "+") {
    return Polarity::Positive;
  }
  if (s == "-") {
    return Polarity::Negative;
  }
  throw Error("bad polarity '" + s + "'");
}

json columns_json(const Eigen::MatrixXd& m, const std::vector<std::string>& names) {
  json out = json::object();
  for (std::size_t j = 0; j < names.size(); ++j) {
    json col = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      col.push_back(m(i, static_cast<Eigen::Index>(j)));
    }
    out[names[j]] = std::move(col);
  }
  return out;
}

std::vector<std::string> sorted_keys(const json& obj) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : obj.items()) {
    keys.push_back(k);
  }
  return keys;  // nlohmann::json objects iterate in key order
}

void fill_columns(Eigen::MatrixXd& m, const json& obj, const std::vector<std::string>& names) {
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& col = obj.at(names[j]);
    if (!col.is_array() || static_cast<Eigen::Index>(col.size()) != m.rows()) {
      throw DimensionMismatchError("vector for '" + names[j] + "' has the wrong length");
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, static_cast<Eigen::Index>(j)) = col.at(static_cast<std::size_t>(i)).get<double>();
    }
  }
}

json cloud_json(const std::map<std::string, Eigen::MatrixXd>& clouds) {
  json out = json::object();
  for (const auto& [term, pts] : clouds) {
    json arr = json::array();
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      json p = json::array();
      for (Eigen::Index r = 0; r < pts.rows(); ++r) {
        p.push_back(pts(r, c));
      }
      arr.push_back(std::move(p));
    }
    out[term] = std::move(arr);
  }
  return out;
}

}  // namespace

json to_json(const EmbeddingConfig& cfg) {
  return {{"positive_tolerance", cfg.positive_tolerance},
          {"negative_margin", cfg.negative_margin},
          {"fit_tolerance", cfg.fit_tolerance}};
}

json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate}, {"max_epochs", cfg.max_epochs},
          {"init_scale", cfg.init_scale},       {"retry_budget", cfg.retry_budget},
          {"rng_algorithm", cfg.rng_algorithm_id}};
}

json to_json(const FitReport& r) {
  return {{"final_error", r.final_error}, {"epochs_used", r.epochs_used}, {"converged", r.converged},
          {"seed", r.seed},               {"attempt", r.attempt},         {"rng_algorithm", r.rng_algorithm}};
}

json to_json(const Embedding& e) {
  return {{"dimension", e.dimension()},
          {"seed", e.seed()},
          {"config", to_json(e.config())},
          {"entities", columns_json(e.entity_points(), e.entities())},
          {"relations", columns_json(e.relation_vectors(), e.relations())}};
}

EmbeddingConfig embedding_config_from_json(const json& j) {
  EmbeddingConfig cfg;
  cfg.positive_tolerance = j.at("positive_tolerance").get<double>();
  cfg.negative_margin = j.at("negative_margin").get<double>();
  cfg.fit_tolerance = j.at("fit_tolerance").get<double>();
  return cfg;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.max_epochs = j.at("max_epochs").get<int>();
  cfg.init_scale = j.at("init_scale").get<double>();
  cfg.retry_budget = j.at("retry_budget").get<int>();
  cfg.rng_algorithm_id = j.at("rng_algorithm").get<std::string>();
  return cfg;
}

FitReport fit_report_from_json(const json& j) {
  FitReport r;
  r.final_error = j.at("final_error").get<double>();
  r.epochs_used = j.at("epochs_used").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.attempt = j.at("attempt").get<int>();
  r.rng_algorithm = j.at("rng_algorithm").get<std::string>();
  return r;
}

Embedding embedding_from_json(const json& j) {
  EmbeddingConfig cfg = embedding_config_from_json(j.at("config"));
  cfg.dimension = j.at("dimension").get<int>();
  Embedding e(sorted_keys(j.at("entities")), sorted_keys(j.at("relations")), cfg, j.at("seed").get<std::uint64_t>());
  fill_columns(e.entity_points(), j.at("entities"), e.entities());
  fill_columns(e.relation_vectors(), j.at("relations"), e.relations());
  if (!e.finite()) {
    throw Error("embedding has non-finite coordinates");
  }
  return e;
}

json to_json(const Ensemble& ens) {
  json members = json::array();
  for (const auto& m : ens.members) {
    members.push_back(to_json(m));
  }
  json reports = json::array();
  for (std::size_t i = 0; i < ens.reports.size(); ++i) {
    json r = to_json(ens.reports[i]);
    json decided = json::array();
    for (const auto& t : ens.completions[i]) {
      decided.push_back({t.relation, t.subject, t.object, polarity_json(t.polarity)});
    }
    r["completion"] = std::move(decided);
    reports.push_back(std::move(r));
  }
  json cfg = to_json(ens.config);
  cfg["dimension"] = ens.config.dimension;
  return {{"kb_digest", ens.kb_digest},
          {"config",
           {{"embedding", cfg},
            {"train", to_json(ens.train_config)},
            {"base_seed", ens.base_seed},
            {"completion_rate", ens.completion_rate},
            {"members", ens.members.size()}}},
          {"members", std::move(members)},
          {"reports", std::move(reports)}};
}

Ensemble ensemble_from_json(const json& j) {
  Ensemble ens;
  ens.kb_digest = j.at("kb_digest").get<std::string>();
  const auto& cfg = j.at("config");
  ens.config = embedding_config_from_json(cfg.at("embedding"));
  ens.config.dimension = cfg.at("embedding").at("dimension").get<int>();
  ens.train_config = train_config_from_json(cfg.at("train"));
  ens.base_seed = cfg.at("base_seed").get<std::uint64_t>();
  ens.completion_rate = cfg.at("completion_rate").get<double>();
  for (const auto& m : j.at("members")) {
    ens.members.push_back(embedding_from_json(m));
  }
  for (const auto& r : j.at("reports")) {
    ens.reports.push_back(fit_report_from_json(r));
    std::vector<SignedTriple> decided;
    for (const auto& t : r.at("completion")) {
      decided.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>(), t.at(2).get<std::string>(),
                         polarity_from_json(t.at(3))});
    }
    ens.completions.push_back(std::move(decided));
  }
  if (ens.members.empty()) {
    throw Error("ensemble has no members");
  }
  if (ens.reports.size() != ens.members.size()) {
    throw Error("ensemble has " + std::to_string(ens.members.size()) + " members but " +
                std::to_string(ens.reports.size()) + " reports");
  }
  for (const auto& m : ens.members) {
    if (!m.compatible_with(ens.members.front()) || !(m.config() == ens.config)) {
      throw Error("ensemble members disagree on vocabulary, dimension or config");
    }
  }
  return ens;
}

json to_json(const AggregateModel& agg) {
  json diameters = json::object();
  for (const auto& [term, d] : agg.diameters) {
    diameters[term] = d;
  }
  json alignments = json::array();
  for (const auto& a : agg.alignments) {
    alignments.push_back({{"residual", a.residual}});
  }
  return {{"dimension", agg.dimension},
          {"member_indices", agg.member_indices},
          {"reference_index", agg.reference_index()},
          {"dedup_tolerance", agg.config.dedup_tolerance},
          {"max_cloud_diameter",
           std::isfinite(agg.config.max_cloud_diameter) ? json(agg.config.max_cloud_diameter) : json(nullptr)},
          {"entity_clouds", cloud_json(agg.entity_clouds)},
          {"relation_clouds", cloud_json(agg.relation_clouds)},
          {"diameters", std::move(diameters)},
          {"alignments", std::move(alignments)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open for writing: " + path);
  }
  out << text;
  if (!out) {
    throw Error("write failed: " + path);
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void save_ensemble(const Ensemble& ens, const std::string& path) { write_text(path, dump(to_json(ens))); }

Ensemble load_ensemble(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
    return ensemble_from_json(j);
  } catch (const json::exception& e) {
    throw Error("invalid ensemble file " + path + ": " + e.what());
  }
}

std::string format_clouds(const AggregateModel& agg) {
  std::string out;
  char buf[40];
  const auto emit = [&](const std::map<std::string, Eigen::MatrixXd>& clouds) {
    for (const auto& [term, pts] : clouds) {
      for (Eigen::Index c = 0; c < pts.cols(); ++c) {
        out += term;
        out += '\t';
        out += std::to_string(agg.member_indices[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < pts.rows(); ++r) {
          std::snprintf(buf, sizeof buf, "\t%.17g", pts(r, c));
          out += buf;
        }
        out += '\n';
      }
    }
  };
  emit(agg.entity_clouds);
  emit(agg.relation_clouds);
  return out;
}

}  // namespace ekb
