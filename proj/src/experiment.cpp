#include "jcas/experiment.hpp"

#include <json.hpp>

#include "jcas/svg.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace jcas {

using nlohmann::json;

void ExperimentConfig::validate() const {
  train.validate();
  if (u_list.empty()) throw std::invalid_argument("config: u_list must not be empty");
  for (std::size_t i = 0; i < u_list.size(); ++i) {
    if (u_list[i] < 1) throw std::invalid_argument("config: u values must be >= 1");
    if (i > 0 && u_list[i] <= u_list[i - 1])
      throw std::invalid_argument("config: u_list must be strictly increasing");
  }
  if (validation_samples < 1)
    throw std::invalid_argument("config: validation_samples must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

namespace {

const std::set<std::string> kKnownKeys = {
    "M", "K", "T_max", "comm_snr_db", "radar_snr_db", "pf_target", "w_r", "w_a",
    "learning_rate", "epochs", "minibatches_per_epoch", "minibatch_size", "encoding",
    "set_method", "seed", "comm_region_deg", "sensing_region_deg", "d_over_lambda",
    "u_list", "validation_samples", "out_dir", "threads"};

AngleRegion region_from(const json& j, const std::string& key) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 2)
    throw std::invalid_argument("config: " + key + " must be [lo, hi] in degrees");
  return {deg_to_rad(arr[0].get<double>()), deg_to_rad(arr[1].get<double>())};
}

}  // namespace

ExperimentConfig config_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");

  std::vector<std::string> unknown;
  for (const auto& [key, _] : j.items())
    if (!kKnownKeys.contains(key)) unknown.push_back(key);
  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw std::invalid_argument(msg);
  }

  ExperimentConfig cfg;
  TrainConfig& t = cfg.train;
  if (j.contains("M")) t.model.num_messages = j["M"].get<uint32_t>();
  if (j.contains("K")) t.model.num_antennas = j["K"].get<uint32_t>();
  if (j.contains("T_max")) t.model.max_targets = j["T_max"].get<uint32_t>();
  if (j.contains("comm_snr_db")) t.comm_snr_db = j["comm_snr_db"].get<double>();
  if (j.contains("radar_snr_db")) t.radar_snr_db = j["radar_snr_db"].get<double>();
  if (j.contains("pf_target")) t.model.pf_target = j["pf_target"].get<double>();
  if (j.contains("w_r")) t.weight_radar = j["w_r"].get<double>();
  if (j.contains("w_a")) t.weight_angle = j["w_a"].get<double>();
  if (j.contains("learning_rate")) t.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("epochs")) t.epochs = j["epochs"].get<uint32_t>();
  if (j.contains("minibatches_per_epoch"))
    t.minibatches_per_epoch = j["minibatches_per_epoch"].get<uint32_t>();
  if (j.contains("minibatch_size")) t.minibatch_size = j["minibatch_size"].get<uint32_t>();
  if (j.contains("encoding"))
    t.model.encoding = encoding_from_string(j["encoding"].get<std::string>());
  if (j.contains("set_method"))
    t.set_method = set_method_from_string(j["set_method"].get<std::string>());
  if (j.contains("seed")) t.seed = j["seed"].get<uint64_t>();
  if (j.contains("comm_region_deg")) t.model.comm_region = region_from(j, "comm_region_deg");
  if (j.contains("sensing_region_deg"))
    t.model.sensing_region = region_from(j, "sensing_region_deg");
  if (j.contains("d_over_lambda")) t.model.d_over_lambda = j["d_over_lambda"].get<double>();
  if (j.contains("u_list")) cfg.u_list = j["u_list"].get<std::vector<std::size_t>>();
  if (j.contains("validation_samples"))
    cfg.validation_samples = j["validation_samples"].get<std::size_t>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<unsigned>();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json j;
  j["M"] = t.model.num_messages;
  j["K"] = t.model.num_antennas;
  j["T_max"] = t.model.max_targets;
  j["comm_snr_db"] = t.comm_snr_db;
  j["radar_snr_db"] = t.radar_snr_db;
  j["pf_target"] = t.model.pf_target;
  j["w_r"] = t.weight_radar;
  j["w_a"] = t.weight_angle;
  j["learning_rate"] = t.learning_rate;
  j["epochs"] = t.epochs;
  j["minibatches_per_epoch"] = t.minibatches_per_epoch;
  j["minibatch_size"] = t.minibatch_size;
  j["encoding"] = std::string(to_string(t.model.encoding));
  j["set_method"] = std::string(to_string(t.set_method));
  j["seed"] = t.seed;
  j["comm_region_deg"] = {rad_to_deg(t.model.comm_region.lo),
                          rad_to_deg(t.model.comm_region.hi)};
  j["sensing_region_deg"] = {rad_to_deg(t.model.sensing_region.lo),
                             rad_to_deg(t.model.sensing_region.hi)};
  j["d_over_lambda"] = t.model.d_over_lambda;
  j["u_list"] = cfg.u_list;
  j["validation_samples"] = cfg.validation_samples;
  j["out_dir"] = cfg.out_dir.string();
  j["threads"] = cfg.threads;
  return j.dump(2);
}

uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(config_to_json(cfg));
}

namespace {

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("JCAS_OUT_DIR"); env && *env) return env;
  return ".";
}

std::vector<std::string> epoch_row(const EpochRecord& r) {
  return {std::to_string(r.epoch),        std::to_string(r.stage),
          format_double(r.loss_comm),     format_double(r.loss_detect),
          format_double(r.loss_angle),    format_double(r.loss_combined),
          format_double(r.pd),            format_double(r.pf),
          format_double(r.pf_minibatch_max), format_double(r.bmi),
          format_double(r.angle_rmse)};
}

}  // namespace

CsvTable history_to_csv(const TrainHistory& history, uint64_t cfg_hash, uint64_t seed) {
  CsvTable t;
  t.comments = {"config_hash=" + hex64(cfg_hash) + " seed=" + std::to_string(seed)};
  t.columns = {"epoch", "stage",  "loss_comm", "loss_detect", "loss_angle", "loss_combined",
               "pd",    "pf",     "pf_mb_max", "bmi",         "angle_rmse"};
  for (const auto& r : history.epochs) t.rows.push_back(epoch_row(r));
  return t;
}

CsvTable metrics_to_csv(const std::vector<MetricsRecord>& records, uint64_t cfg_hash,
                        uint64_t seed) {
  CsvTable t;
  t.comments = {"config_hash=" + hex64(cfg_hash) + " seed=" + std::to_string(seed)};
  t.columns = {"u",           "bmi",         "pd",           "pf",
               "rmse_nn",     "rmse_esprit", "gain_comm_db", "gain_radar_db",
               "num_scans",   "matched_nn",  "matched_esprit"};
  for (const auto& r : records)
    t.rows.push_back({std::to_string(r.upsampling), format_double(r.bmi),
                      format_double(r.pd), format_double(r.pf), format_double(r.rmse_nn),
                      format_double(r.rmse_esprit), format_double(r.gain_comm_db),
                      format_double(r.gain_radar_db), std::to_string(r.num_scans),
                      std::to_string(r.matched_nn), std::to_string(r.matched_esprit)});
  return t;
}

std::filesystem::path cmd_train(const ExperimentConfig& cfg) {
  const auto out_dir = resolve_out_dir(cfg);
  std::filesystem::create_directories(out_dir);
  TrainConfig tc = cfg.train;
  tc.out_dir = out_dir;
  const TrainResult result = train(tc);
  const auto history_path = out_dir / "history.csv";
  write_csv(history_to_csv(result.history, config_hash(cfg), tc.seed), history_path);
  return history_path;
}

std::filesystem::path cmd_validate(const ExperimentConfig& cfg,
                                   const std::filesystem::path& checkpoint) {
  const JcasModel model = load_checkpoint(checkpoint);
  const TrainConfig& tc = cfg.train;
  if (model.cfg.num_messages != tc.model.num_messages ||
      model.cfg.num_antennas != tc.model.num_antennas ||
      model.cfg.max_targets != tc.model.max_targets)
    throw std::runtime_error("checkpoint/config mismatch: M, K, or T_max differ");

  ValidationConfig vc;
  vc.u_list = cfg.u_list;
  vc.num_scans = cfg.validation_samples;
  vc.seed = tc.seed;
  const auto records = validate(model, tc.noise(), vc);

  const auto out_dir = resolve_out_dir(cfg);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "metrics.csv";
  write_csv(metrics_to_csv(records, config_hash(cfg), tc.seed), path);
  return path;
}

std::filesystem::path cmd_encoding_compare(const ExperimentConfig& cfg) {
  TrainConfig counting_cfg = cfg.train;
  counting_cfg.model.encoding = Encoding::kCounting;
  TrainConfig onehot_cfg = cfg.train;
  onehot_cfg.model.encoding = Encoding::kOneHot;
  const TrainResult counting = train(counting_cfg);
  const TrainResult onehot = train(onehot_cfg);

  CsvTable t;
  t.comments = {"config_hash=" + hex64(config_hash(cfg)) +
                " seed=" + std::to_string(cfg.train.seed)};
  t.columns = {"epoch",      "stage",      "counting_pd", "counting_pf",
               "onehot_pd",  "onehot_pf",  "counting_loss_detect", "onehot_loss_detect"};
  for (std::size_t e = 0; e < counting.history.epochs.size(); ++e) {
    const auto& c = counting.history.epochs[e];
    const auto& o = onehot.history.epochs[e];
    t.rows.push_back({std::to_string(c.epoch), std::to_string(c.stage), format_double(c.pd),
                      format_double(c.pf), format_double(o.pd), format_double(o.pf),
                      format_double(c.loss_detect), format_double(o.loss_detect)});
  }
  const auto out_dir = resolve_out_dir(cfg);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "encoding_compare.csv";
  write_csv(t, path);
  return path;
}

std::filesystem::path cmd_esprit_bench(const ExperimentConfig& cfg) {
  const TrainConfig& tc = cfg.train;
  const ModelConfig& mc = tc.model;
  const ArrayConfig array = mc.array();
  const NoiseConfig noise = tc.noise();
  Rng base(tc.seed, "esprit-bench");

  CsvTable t;
  t.comments = {"config_hash=" + hex64(config_hash(cfg)) + " seed=" + std::to_string(tc.seed)};
  t.columns = {"u", "rmse_esprit", "num_scans", "matched"};
  for (std::size_t u : cfg.u_list) {
    double sse = 0.0;
    std::size_t pairs = 0;
    for (std::size_t scan = 0; scan < cfg.validation_samples; ++scan) {
      Rng rng = base.fork("scan", scan);
      // Known target count; unit-power flat illumination.
      SceneTruth scene = draw_scene(mc.num_messages, mc.max_targets, mc.comm_region,
                                    mc.sensing_region, TargetCountRule::uniform(), noise,
                                    rng);
      if (scene.target_count() == 0) continue;
      CVec y(mc.num_antennas);
      CMat z(mc.num_antennas, u);
      for (std::size_t s = 0; s < u; ++s) {
        Rng snap = rng.fork("snapshot", s);
        const double amp = 1.0 / std::sqrt(static_cast<double>(mc.num_antennas));
        for (auto& v : y) v = {amp, 0.0};
        const CVec col = radar_channel(y, scene, noise, array, snap);
        for (std::size_t i = 0; i < col.size(); ++i) z(i, s) = col[i];
      }
      const EspritResult res = esprit_scan(z, scene.target_count(), array);
      for (const auto& [ti, ei] : match_min_pairs(scene.target_angles, res.angles)) {
        const double d = scene.target_angles[ti] - res.angles[ei];
        sse += d * d;
        ++pairs;
      }
    }
    const double rmse = pairs > 0 ? std::sqrt(sse / static_cast<double>(pairs)) : 0.0;
    t.rows.push_back({std::to_string(u), format_double(rmse),
                      std::to_string(cfg.validation_samples), std::to_string(pairs)});
  }
  const auto out_dir = resolve_out_dir(cfg);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "esprit_bench.csv";
  write_csv(t, path);
  return path;
}

void cmd_plot(const std::vector<std::filesystem::path>& csv_paths,
              const std::filesystem::path& spec_path,
              const std::filesystem::path& out_svg) {
  std::ifstream is(spec_path);
  if (!is) throw std::runtime_error("cannot open plot spec: " + spec_path.string());
  json spec_json = json::parse(is);

  std::vector<CsvTable> tables;
  for (const auto& p : csv_paths) {
    CsvTable t = read_csv(p);
    if (t.rows.empty()) throw std::runtime_error("empty CSV: " + p.string());
    tables.push_back(std::move(t));
  }
  if (tables.empty()) throw std::runtime_error("plot: no CSV inputs");

  PlotSpec spec;
  spec.title = spec_json.value("title", "");
  spec.xlabel = spec_json.value("xlabel", spec_json.value("x", ""));
  spec.ylabel = spec_json.value("ylabel", "");
  spec.logx = spec_json.value("logx", false);
  spec.logy = spec_json.value("logy", false);
  const std::string x_col = spec_json.at("x").get<std::string>();

  std::vector<std::string> missing;
  std::vector<PlotSeries> series;
  for (const auto& s : spec_json.at("series")) {
    const std::size_t csv_idx = s.value("csv", 0u);
    if (csv_idx >= tables.size())
      throw std::runtime_error("plot: series references csv " + std::to_string(csv_idx) +
                               " but only " + std::to_string(tables.size()) + " given");
    const CsvTable& t = tables[csv_idx];
    const std::string y_col = s.at("y").get<std::string>();
    if (!t.has_column(x_col)) missing.push_back(x_col);
    if (!t.has_column(y_col)) missing.push_back(y_col);
    if (!missing.empty()) continue;
    PlotSeries ps;
    ps.x = t.numeric_column(x_col);
    ps.y = t.numeric_column(y_col);
    ps.label = s.value("label", y_col);
    series.push_back(std::move(ps));
  }
  if (!missing.empty()) {
    std::string msg = "plot: missing columns:";
    for (const auto& c : missing) msg += " '" + c + "'";
    throw std::runtime_error(msg);
  }
  write_svg(series, spec, out_svg);
}

}  // namespace jcas
