/**
 * hfslam command-line tool.
 *
 * Subcommands: simulate | slam | hfpgm | queue-demo | validate-graph | metrics
 * Exit codes: 0 success, 1 validation/metric failure, 2 usage or parse error.
 * Every output file carries tool version, config hash, and seed; reruns with
 * the same seed and configuration are byte-identical.
 */

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli_support.hpp"
#include "hfslam/bragraph/graph.hpp"
#include "hfslam/eventqueue/queue.hpp"
#include "hfslam/hfpgm/agent.hpp"
#include "hfslam/slamcore/fastslam.hpp"
#include "hfslam/ssm/discrete.hpp"
#include "hfslam/statecore/log.hpp"
#include "hfslam/statecore/textio.hpp"
#include "hfslam/version.hpp"
#include "hfslam/worldsim/episode.hpp"

namespace fs = std::filesystem;
using namespace hfslam;
using cli::EffectiveConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

// Streams off the user seed: one purpose, one stream id.
constexpr std::uint64_t kStreamSimulate = 0;
constexpr std::uint64_t kStreamFilter = 1;
constexpr std::uint64_t kStreamQueueData = 2;
constexpr std::uint64_t kStreamQueueParticles = 3;

struct ConfigMerge {
  std::map<std::string, std::string> file_values;

  void load(const std::string& path, const std::vector<std::string>& allowed) {
    if (!path.empty()) file_values = cli::read_config_file(path, allowed);
  }
  // flags win: only fall back to the config file when the flag was not given
  template <typename T>
  void apply(const CLI::Option* opt, const std::string& key, T& target) {
    if (opt->count() > 0) return;
    auto it = file_values.find(key);
    if (it == file_values.end()) return;
    std::istringstream is(it->second);
    if constexpr (std::is_same_v<T, bool>) {
      target = it->second == "true" || it->second == "1";
    } else if constexpr (std::is_same_v<T, std::string>) {
      target = it->second;
    } else {
      if (!(is >> target)) {
        throw statecore::ParseError("bad config value for '" + key + "'", 0);
      }
    }
  }
};

worldsim::WorldSpec load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw statecore::ParseError("cannot open world file '" + path + "'", 0);
  return worldsim::WorldSpec::load(in);
}

worldsim::TrajectoryScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw statecore::ParseError("cannot open script file '" + path + "'", 0);
  return worldsim::TrajectoryScript::load(in);
}

worldsim::ObservationLog load_obs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw statecore::ParseError("cannot open observation log '" + path + "'", 0);
  return worldsim::read_observation_log(in);
}

worldsim::TruthLog load_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw statecore::ParseError("cannot open truth log '" + path + "'", 0);
  return worldsim::read_truth_log(in);
}

std::string map_ascii(const slamcore::OccupancyGrid& map) {
  std::string out;
  for (int y = map.spec.height - 1; y >= 0; --y) {
    for (int x = 0; x < map.spec.width; ++x) {
      const double l = map.at(x, y);
      out += l > 0.0 ? '#' : (l < 0.0 ? '.' : ' ');
    }
    out += '\n';
  }
  return out;
}

struct MapQualityResult {
  double accuracy = 0.0;  // vs the map ray-traced at the true poses
  double wall_accuracy = 0.0;  // vs the raw wall grid
  long observed = 0;
};

/// Reference map: the same scans integrated at the ground-truth poses — the
/// best map the sensor data admits. Accuracy is thresholded-occupancy
/// agreement on cells known in both maps.
MapQualityResult map_quality(const slamcore::OccupancyGrid& map, const worldsim::WorldSpec& world,
                             const worldsim::TruthLog* truth,
                             const std::vector<statecore::Observation>* obs) {
  MapQualityResult r;
  long correct = 0, wall_correct = 0, wall_observed = 0;
  std::optional<slamcore::OccupancyGrid> reference;
  if (truth != nullptr && obs != nullptr && truth->entries.size() == obs->size()) {
    reference.emplace(map.spec, map.l_max);
    for (std::size_t i = 0; i < obs->size(); ++i) {
      slamcore::integrate_scan(*reference, truth->entries[i].pose, (*obs)[i].scan);
    }
  }
  for (int y = 0; y < map.spec.height; ++y) {
    for (int x = 0; x < map.spec.width; ++x) {
      if (!map.known(x, y)) continue;
      ++wall_observed;
      if (map.occupied(x, y) == world.wall_at(x, y)) ++wall_correct;
      if (reference.has_value() && reference->known(x, y)) {
        ++r.observed;
        if (map.occupied(x, y) == reference->occupied(x, y)) ++correct;
      }
    }
  }
  r.accuracy = r.observed > 0 ? static_cast<double>(correct) / r.observed : 0.0;
  r.wall_accuracy = wall_observed > 0 ? static_cast<double>(wall_correct) / wall_observed : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config, world, script, out_dir;
  std::uint64_t seed = 0;
  bool emit_ascii_map = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto world = load_world(a.world);
  const auto script = load_script(a.script);
  statecore::RandomSource rs(a.seed, kStreamSimulate);
  const auto log = worldsim::run_episode(world, script, rs);

  EffectiveConfig cfg;
  cfg.set("command", "simulate");
  cfg.set("world", a.world);
  cfg.set("script", a.script);
  cfg.set("seed", static_cast<std::int64_t>(a.seed));
  const auto meta = cfg.meta(a.seed);

  {
    auto out = cli::open_output(fs::path(a.out_dir) / "obs.log");
    worldsim::write_observation_log(out, log, meta);
  }
  {
    auto out = cli::open_output(fs::path(a.out_dir) / "truth.log");
    worldsim::write_truth_log(out, log, meta);
  }
  if (a.emit_ascii_map) std::cout << world.ascii_map();

  std::set<std::string> rooms;
  for (const auto& s : log.steps) rooms.insert(s.room);
  std::cout << "simulate: " << log.steps.size() << " steps, " << rooms.size()
            << " rooms visited, seed " << a.seed << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// slam / hfpgm
// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config, obs, truth, world, out_dir;
  std::uint64_t seed = 0;
  int particles = 100;
  double v_sigma = -1.0;  // <0: world actuation noise times the proposal factor
  double w_sigma = -1.0;
  double sensor_sigma = 0.25;
  double sensor_hit = 0.9;
  int beam_stride = 2;
  double alpha = 1.0;
  bool disable_lec = false;
  bool emit_ascii_map = false;
};

// Slightly widened proposal over the simulator's true actuation noise keeps
// particle support around the posterior.
constexpr double kProposalNoiseFactor = 1.25;

slamcore::FastSlamConfig make_slam_config(const RunArgs& a, const worldsim::WorldSpec& world) {
  slamcore::FastSlamConfig cfg;
  cfg.n_particles = a.particles;
  cfg.motion.v_sigma =
      a.v_sigma >= 0.0 ? a.v_sigma : kProposalNoiseFactor * world.actuation.v_sigma;
  cfg.motion.w_sigma =
      a.w_sigma >= 0.0 ? a.w_sigma : kProposalNoiseFactor * world.actuation.w_sigma;
  cfg.sensor.sigma = a.sensor_sigma;
  cfg.sensor.hit_weight = a.sensor_hit;
  cfg.sensor.random_weight = 1.0 - a.sensor_hit;
  cfg.sensor.beam_stride = a.beam_stride;
  return cfg;
}

void fill_run_config(EffectiveConfig& cfg, const RunArgs& a, const char* command) {
  cfg.set("command", command);
  cfg.set("obs", a.obs);
  cfg.set("truth", a.truth);
  cfg.set("world", a.world);
  cfg.set("seed", static_cast<std::int64_t>(a.seed));
  cfg.set("particles", static_cast<std::int64_t>(a.particles));
  cfg.set("v_sigma", a.v_sigma);
  cfg.set("w_sigma", a.w_sigma);
  cfg.set("sensor_sigma", a.sensor_sigma);
  cfg.set("sensor_hit", a.sensor_hit);
  cfg.set("beam_stride", static_cast<std::int64_t>(a.beam_stride));
}

struct TrajectoryMetrics {
  double rmse = 0.0;
  double final_error = 0.0;
};

TrajectoryMetrics trajectory_error(const std::vector<statecore::Posture>& estimate,
                                   const worldsim::TruthLog& truth) {
  if (estimate.size() != truth.entries.size()) {
    throw statecore::ParseError("observation/truth length mismatch", 0);
  }
  TrajectoryMetrics m;
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double dx = estimate[i].x - truth.entries[i].pose.x;
    const double dy = estimate[i].y - truth.entries[i].pose.y;
    acc += dx * dx + dy * dy;
    if (i + 1 == estimate.size()) m.final_error = std::sqrt(dx * dx + dy * dy);
  }
  m.rmse = std::sqrt(acc / estimate.size());
  return m;
}

int cmd_slam(const RunArgs& a) {
  const auto world = load_world(a.world);
  const auto obs_log = load_obs(a.obs);
  const auto slam_cfg = make_slam_config(a, world);

  EffectiveConfig cfg;
  fill_run_config(cfg, a, "slam");
  const auto meta = cfg.meta(a.seed);

  statecore::RandomSource rs(a.seed, kStreamFilter);
  auto particles = slamcore::init_particles(slam_cfg, world.grid, obs_log.start);

  cli::TrajectoryWriter traj(fs::path(a.out_dir) / "trajectory.csv", meta);
  std::vector<statecore::Posture> estimates;
  estimates.reserve(obs_log.observations.size());
  for (const auto& obs : obs_log.observations) {
    slamcore::fastslam_step(particles, obs, slam_cfg, rs);
    const auto pose = slamcore::mean_pose(particles);
    estimates.push_back(pose);
    traj.row(obs.t, pose);
  }

  const auto& map = slamcore::best_map(particles);
  {
    auto out = cli::open_output(fs::path(a.out_dir) / "map.txt");
    map.save(out, meta);
  }
  if (a.emit_ascii_map) std::cout << map_ascii(map);

  std::vector<std::pair<std::string, double>> metrics;
  std::optional<worldsim::TruthLog> truth;
  if (!a.truth.empty()) {
    truth = load_truth(a.truth);
    const auto est = trajectory_error(estimates, *truth);
    const auto dead = trajectory_error(cli::dead_reckon(obs_log.start, obs_log.observations),
                                       *truth);
    metrics.emplace_back("rmse_pos", est.rmse);
    metrics.emplace_back("final_pos_error", est.final_error);
    metrics.emplace_back("dead_reckon_rmse", dead.rmse);
    metrics.emplace_back("dead_reckon_final_error", dead.final_error);
  }
  const auto quality = map_quality(map, world, truth ? &*truth : nullptr,
                                   &obs_log.observations);
  if (truth) metrics.emplace_back("map_accuracy", quality.accuracy);
  metrics.emplace_back("map_wall_accuracy", quality.wall_accuracy);
  metrics.emplace_back("map_observed_cells", static_cast<double>(quality.observed));
  cli::write_metrics_file(fs::path(a.out_dir) / "metrics.txt", metrics, meta);

  std::cout << "slam: " << obs_log.observations.size() << " steps, map accuracy "
            << quality.accuracy << "\n";
  return kExitOk;
}

int cmd_hfpgm(const RunArgs& a) {
  const auto world = load_world(a.world);
  const auto obs_log = load_obs(a.obs);

  hfpgm::HfConfig hf_cfg;
  hf_cfg.slam = make_slam_config(a, world);
  hf_cfg.lec_enabled = !a.disable_lec;
  hf_cfg.g_bandwidth = 2.0 * world.grid.resolution;
  hf_cfg.place.alpha = a.alpha;
  hf_cfg.place.n_object_types = world.n_object_types;
  hf_cfg.place.n_landscape_codes = world.n_landscape_codes;
  hf_cfg.place.position_prior.mu_x = world.grid.origin_x +
                                     0.5 * world.grid.width * world.grid.resolution;
  hf_cfg.place.position_prior.mu_y = world.grid.origin_y +
                                     0.5 * world.grid.height * world.grid.resolution;

  EffectiveConfig cfg;
  fill_run_config(cfg, a, "hfpgm");
  cfg.set("alpha", a.alpha);
  cfg.set_bool("disable_lec", a.disable_lec);
  const auto meta = cfg.meta(a.seed);

  statecore::RandomSource rs(a.seed, kStreamFilter);
  hfpgm::HfAgent agent(hf_cfg, world.grid, obs_log.start);

  cli::TrajectoryWriter traj(fs::path(a.out_dir) / "trajectory.csv", meta);
  auto trace = cli::open_output(fs::path(a.out_dir) / "trace.csv");
  trace << "#";
  for (const auto& [k, v] : meta) trace << " " << k << "=" << v;
  trace << "\nt,x,y,theta,map_category,cluster_count,ll_por,ll_per,ll_per_baseline\n";

  std::vector<statecore::Posture> estimates;
  std::vector<int> categories;
  std::vector<double> ll_per, ll_per_baseline, ll_por;
  for (const auto& obs : obs_log.observations) {
    const auto res = agent.step(obs, rs);
    estimates.push_back(res.pose_estimate);
    categories.push_back(res.map_category);
    traj.row(obs.t, res.pose_estimate);
    trace << obs.t << ',' << statecore::format_double(res.pose_estimate.x) << ','
          << statecore::format_double(res.pose_estimate.y) << ','
          << statecore::format_double(res.pose_estimate.theta) << ',' << res.map_category << ','
          << res.cluster_count << ',' << statecore::format_double(res.ll_por) << ','
          << statecore::format_double(res.ll_per) << ','
          << statecore::format_double(res.ll_per_baseline) << '\n';
    if (std::isfinite(res.ll_per)) ll_per.push_back(res.ll_per);
    if (std::isfinite(res.ll_per_baseline)) ll_per_baseline.push_back(res.ll_per_baseline);
    if (std::isfinite(res.ll_por)) ll_por.push_back(res.ll_por);
  }

  const auto& map = slamcore::best_map(agent.particles());
  {
    auto out = cli::open_output(fs::path(a.out_dir) / "map.txt");
    map.save(out, meta);
  }
  {
    auto out = cli::open_output(fs::path(a.out_dir) / "place_model.txt");
    agent.place_model().save(out);
  }
  if (a.emit_ascii_map) std::cout << map_ascii(map);

  std::vector<std::pair<std::string, double>> metrics;
  std::optional<worldsim::TruthLog> truth;
  if (!a.truth.empty()) {
    truth = load_truth(a.truth);
    const auto est = trajectory_error(estimates, *truth);
    metrics.emplace_back("rmse_pos", est.rmse);
    metrics.emplace_back("final_pos_error", est.final_error);
    // room labels -> dense ints for the clustering agreement score
    std::map<std::string, int> label_ids;
    std::vector<int> rooms;
    for (const auto& e : truth->entries) {
      rooms.push_back(label_ids.emplace(e.room, static_cast<int>(label_ids.size())).first->second);
    }
    metrics.emplace_back("ari", cli::adjusted_rand_index(categories, rooms));
  }
  metrics.emplace_back("cluster_count", agent.place_model().size());
  if (!ll_per.empty()) {
    metrics.emplace_back("ll_per_median", cli::median(ll_per));
    metrics.emplace_back("ll_per_baseline_median", cli::median(ll_per_baseline));
  }
  if (!ll_por.empty()) metrics.emplace_back("ll_por_median", cli::median(ll_por));
  const auto quality = map_quality(map, world, truth ? &*truth : nullptr,
                                   &obs_log.observations);
  if (truth) metrics.emplace_back("map_accuracy", quality.accuracy);
  metrics.emplace_back("map_wall_accuracy", quality.wall_accuracy);
  metrics.emplace_back("map_observed_cells", static_cast<double>(quality.observed));
  cli::write_metrics_file(fs::path(a.out_dir) / "metrics.txt", metrics, meta);

  std::cout << "hfpgm: " << obs_log.observations.size() << " steps, "
            << agent.place_model().size() << " clusters\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// queue-demo
// ---------------------------------------------------------------------------

struct QueueArgs {
  std::string config, model, out_dir;
  std::uint64_t seed = 0;
  int steps = 50;
  int lag = 2;
  int lead = 2;
  int queue_particles = 0;
};

int cmd_queue_demo(const QueueArgs& a) {
  std::ifstream in(a.model);
  if (!in) throw statecore::ParseError("cannot open model file '" + a.model + "'", 0);
  const auto model = ssm::DiscreteSsm::load(in);
  eventqueue::QueueConfig qcfg{a.lag, a.lead};
  qcfg.validate();
  if (a.steps < 1) throw statecore::ParseError("steps must be >= 1", 0);

  EffectiveConfig cfg;
  cfg.set("command", "queue-demo");
  cfg.set("model", a.model);
  cfg.set("seed", static_cast<std::int64_t>(a.seed));
  cfg.set("steps", static_cast<std::int64_t>(a.steps));
  cfg.set("lag", static_cast<std::int64_t>(a.lag));
  cfg.set("lead", static_cast<std::int64_t>(a.lead));
  cfg.set("queue_particles", static_cast<std::int64_t>(a.queue_particles));
  const auto meta = cfg.meta(a.seed);

  // sample a state/observation trajectory from the model itself
  statecore::RandomSource data_rs(a.seed, kStreamQueueData);
  const auto kernels = eventqueue::kernels_from(model);
  std::vector<int> ys;
  {
    int x = kernels.sample_prior(data_rs);
    for (int t = 1; t <= a.steps; ++t) {
      x = kernels.sample_transition(x, 0, data_rs);
      double u = data_rs.uniform01();
      int y = model.n_obs - 1;
      for (int k = 0; k < model.n_obs; ++k) {
        u -= model.emit(x, k);
        if (u < 0.0) {
          y = k;
          break;
        }
      }
      ys.push_back(y);
    }
  }
  const std::vector<int> us(ys.size(), 0);

  auto queue = eventqueue::ExactQueue::init(model, qcfg);
  std::optional<eventqueue::ParticleQueue> pqueue;
  statecore::RandomSource particle_rs(a.seed, kStreamQueueParticles);
  if (a.queue_particles > 0) {
    pqueue = eventqueue::ParticleQueue::init(kernels, qcfg, a.queue_particles, particle_rs);
  }

  auto trace = cli::open_output(fs::path(a.out_dir) / "queue_trace.csv");
  trace << "#";
  for (const auto& [k, v] : meta) trace << " " << k << "=" << v;
  trace << "\nstep,offset,state,probability\n";

  std::vector<double> max_tv_exact(qcfg.window_size(), 0.0);
  std::vector<double> max_tv_particle(qcfg.window_size(), 0.0);
  for (int t = 1; t <= a.steps; ++t) {
    queue.step(ys[t - 1], 0, model);
    if (pqueue) pqueue->step(ys[t - 1], 0, kernels, particle_rs);

    const auto filtered = ssm::filter_sequence(
        model, std::span<const int>(ys.data(), t), std::span<const int>(us.data(), t));
    const auto smoothed = ssm::forward_backward(
        model, std::span<const int>(ys.data(), t), std::span<const int>(us.data(), t));

    for (int j = queue.window_begin(); j <= queue.window_end(); ++j) {
      const auto marg = queue.marginal(j);
      const int offset = j - t;
      std::vector<double> oracle;
      if (j <= t) {
        oracle = smoothed[j];  // past and present: smoothing (= filter at j == t)
      } else {
        const std::vector<int> future(j - t, 0);
        oracle = ssm::k_step_predict(filtered[t], future, model).probs;
      }
      const double tv = ssm::total_variation(marg.probs, oracle);
      max_tv_exact[offset + qcfg.lag] = std::max(max_tv_exact[offset + qcfg.lag], tv);
      for (int s = 0; s < model.n_states; ++s) {
        trace << t << ',' << offset << ',' << s << ','
              << statecore::format_double(marg.probs[s]) << '\n';
      }
      if (pqueue && j >= pqueue->window_begin() && j <= pqueue->window_end()) {
        const double ptv = ssm::total_variation(pqueue->marginal(j).probs, marg.probs);
        max_tv_particle[offset + qcfg.lag] = std::max(max_tv_particle[offset + qcfg.lag], ptv);
      }
    }
  }

  auto report = cli::open_output(fs::path(a.out_dir) / "report.txt");
  statecore::RecordWriter rep(report, "queuereport", 1, meta);
  double overall = 0.0;
  for (int off = -qcfg.lag; off <= qcfg.lead; ++off) {
    statecore::Record r;
    r.name = "offset";
    r.add("offset", off).add("max_tv_exact", max_tv_exact[off + qcfg.lag]);
    if (pqueue) r.add("max_tv_particle", max_tv_particle[off + qcfg.lag]);
    rep.write(r);
    overall = std::max(overall, max_tv_exact[off + qcfg.lag]);
    std::cout << "offset " << off << ": max TV vs oracle "
              << statecore::format_double(max_tv_exact[off + qcfg.lag]);
    if (pqueue) {
      std::cout << ", particle vs exact "
                << statecore::format_double(max_tv_particle[off + qcfg.lag]);
    }
    std::cout << "\n";
  }
  std::cout << "overall max TV vs oracle: " << statecore::format_double(overall) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate-graph
// ---------------------------------------------------------------------------

struct GraphArgs {
  std::string graph;
  std::string format = "human";
  bool cycles = false;
};

int cmd_validate_graph(const GraphArgs& a) {
  std::ifstream in(a.graph);
  if (!in) throw statecore::ParseError("cannot open graph file '" + a.graph + "'", 0);
  const auto graph = bragraph::AllocationGraph::load(in);
  const auto violations = bragraph::validate(graph);

  if (a.format == "csv") {
    std::cout << "rule,message\n";
    for (const auto& v : violations) {
      std::cout << v.rule << ",\"" << v.message << "\"\n";
    }
  } else {
    if (violations.empty()) {
      std::cout << "graph '" << graph.name << "': pass (" << graph.nodes.size() << " nodes, "
                << graph.links.size() << " links)\n";
    } else {
      std::cout << "graph '" << graph.name << "': " << violations.size() << " violation(s)\n";
      for (const auto& v : violations) {
        std::cout << "  [" << v.rule << "] " << v.message << "\n";
      }
    }
  }
  if (a.cycles) {
    for (const auto& c : bragraph::cycle_report(graph)) {
      std::cout << "cycle (next-time links: " << c.next_time_count << "):";
      for (const auto& n : c.node_path) std::cout << " " << n;
      std::cout << "\n";
    }
  }
  return violations.empty() ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

struct MetricsArgs {
  std::vector<std::string> inputs;
  std::string out_dir;
};

int cmd_metrics(const MetricsArgs& a) {
  if (a.inputs.empty()) throw statecore::ParseError("metrics: no input files", 0);
  std::map<std::string, std::vector<double>> by_name;
  for (const auto& path : a.inputs) {
    for (const auto& [name, value] : cli::read_metrics_file(path)) {
      by_name[name].push_back(value);
    }
  }
  auto out = cli::open_output(fs::path(a.out_dir) / "summary.csv");
  out << "# version=" << HFSLAM_VERSION_STRING << " inputs=" << a.inputs.size() << "\n";
  out << "metric,count,median,iqr\n";
  for (const auto& [name, values] : by_name) {
    out << name << ',' << values.size() << ',' << statecore::format_double(cli::median(values))
        << ',' << statecore::format_double(cli::interquartile_range(values)) << '\n';
    std::cout << name << ": median " << statecore::format_double(cli::median(values)) << " (n="
              << values.size() << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hippocampal-formation SLAM toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HFSLAM_VERSION_STRING);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run a scripted episode in a world");
  auto* sim_config = sim_cmd->add_option("--config", sim.config, "config file (key=value lines)");
  auto* sim_world = sim_cmd->add_option("--world", sim.world, "world file");
  auto* sim_script = sim_cmd->add_option("--script", sim.script, "trajectory script");
  auto* sim_seed = sim_cmd->add_option("--seed", sim.seed, "random seed");
  auto* sim_out = sim_cmd->add_option("--out-dir", sim.out_dir, "output directory");
  auto* sim_ascii = sim_cmd->add_flag("--emit-ascii-map", sim.emit_ascii_map, "print world map");

  RunArgs slam_args;
  auto* slam_cmd = app.add_subcommand("slam", "grid FastSLAM over an observation log");
  auto* slam_config = slam_cmd->add_option("--config", slam_args.config, "config file");
  auto* slam_obs = slam_cmd->add_option("--obs", slam_args.obs, "observation log");
  auto* slam_truth = slam_cmd->add_option("--truth", slam_args.truth, "ground-truth log");
  auto* slam_world = slam_cmd->add_option("--world", slam_args.world, "world file (geometry)");
  auto* slam_seed = slam_cmd->add_option("--seed", slam_args.seed, "random seed");
  auto* slam_out = slam_cmd->add_option("--out-dir", slam_args.out_dir, "output directory");
  auto* slam_particles = slam_cmd->add_option("--particles", slam_args.particles, "particle count");
  auto* slam_vs = slam_cmd->add_option("--v-sigma", slam_args.v_sigma, "motion noise override");
  auto* slam_ws = slam_cmd->add_option("--w-sigma", slam_args.w_sigma, "rotation noise override");
  auto* slam_ss = slam_cmd->add_option("--sensor-sigma", slam_args.sensor_sigma,
                                       "likelihood field width");
  auto* slam_bs = slam_cmd->add_option("--beam-stride", slam_args.beam_stride,
                                       "likelihood beam subsampling");
  auto* slam_sh = slam_cmd->add_option("--sensor-hit", slam_args.sensor_hit,
                                       "hit weight of the beam mixture");
  auto* slam_ascii = slam_cmd->add_flag("--emit-ascii-map", slam_args.emit_ascii_map,
                                        "print final map");

  RunArgs hf_args;
  auto* hf_cmd = app.add_subcommand("hfpgm", "integrated dual-stream agent over a log");
  auto* hf_config = hf_cmd->add_option("--config", hf_args.config, "config file");
  auto* hf_obs = hf_cmd->add_option("--obs", hf_args.obs, "observation log");
  auto* hf_truth = hf_cmd->add_option("--truth", hf_args.truth, "ground-truth log");
  auto* hf_world = hf_cmd->add_option("--world", hf_args.world, "world file (geometry)");
  auto* hf_seed = hf_cmd->add_option("--seed", hf_args.seed, "random seed");
  auto* hf_out = hf_cmd->add_option("--out-dir", hf_args.out_dir, "output directory");
  auto* hf_particles = hf_cmd->add_option("--particles", hf_args.particles, "particle count");
  auto* hf_vs = hf_cmd->add_option("--v-sigma", hf_args.v_sigma, "motion noise override");
  auto* hf_ws = hf_cmd->add_option("--w-sigma", hf_args.w_sigma, "rotation noise override");
  auto* hf_ss = hf_cmd->add_option("--sensor-sigma", hf_args.sensor_sigma,
                                   "likelihood field width");
  auto* hf_bs = hf_cmd->add_option("--beam-stride", hf_args.beam_stride,
                                   "likelihood beam subsampling");
  auto* hf_sh = hf_cmd->add_option("--sensor-hit", hf_args.sensor_hit,
                                   "hit weight of the beam mixture");
  auto* hf_alpha = hf_cmd->add_option("--alpha", hf_args.alpha, "DP concentration");
  auto* hf_dl = hf_cmd->add_flag("--disable-lec", hf_args.disable_lec,
                                 "drop the egocentric stream (reduces to plain FastSLAM)");
  auto* hf_ascii = hf_cmd->add_flag("--emit-ascii-map", hf_args.emit_ascii_map,
                                    "print final map");

  QueueArgs q_args;
  auto* q_cmd = app.add_subcommand("queue-demo",
                                   "exact sliding-window queue vs reference filters");
  auto* q_config = q_cmd->add_option("--config", q_args.config, "config file");
  auto* q_model = q_cmd->add_option("--model", q_args.model, "discrete model file");
  auto* q_seed = q_cmd->add_option("--seed", q_args.seed, "random seed");
  auto* q_out = q_cmd->add_option("--out-dir", q_args.out_dir, "output directory");
  auto* q_steps = q_cmd->add_option("--steps", q_args.steps, "episode length");
  auto* q_lag = q_cmd->add_option("--lag", q_args.lag, "past window side");
  auto* q_lead = q_cmd->add_option("--lead", q_args.lead, "future window side");
  auto* q_n = q_cmd->add_option("--particles", q_args.queue_particles,
                                "also run the particle backend (0 = off)");

  GraphArgs g_args;
  auto* g_cmd = app.add_subcommand("validate-graph", "check an allocation graph");
  g_cmd->add_option("graph", g_args.graph, "graph file")->required();
  g_cmd->add_option("--format", g_args.format, "human | csv")
      ->check(CLI::IsMember({"human", "csv"}));
  g_cmd->add_flag("--cycles", g_args.cycles, "also print the generative cycle report");

  MetricsArgs m_args;
  auto* m_cmd = app.add_subcommand("metrics", "aggregate per-seed metrics files");
  m_cmd->add_option("inputs", m_args.inputs, "metrics files");
  m_cmd->add_option("--out-dir", m_args.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) {
      ConfigMerge merge;
      merge.load(sim.config, {"world", "script", "seed", "out_dir", "emit_ascii_map"});
      merge.apply(sim_world, "world", sim.world);
      merge.apply(sim_script, "script", sim.script);
      merge.apply(sim_seed, "seed", sim.seed);
      merge.apply(sim_out, "out_dir", sim.out_dir);
      merge.apply(sim_ascii, "emit_ascii_map", sim.emit_ascii_map);
      (void)sim_config;
      if (sim.world.empty() || sim.script.empty() || sim.out_dir.empty()) {
        throw statecore::ParseError("simulate needs --world, --script, --out-dir", 0);
      }
      return cmd_simulate(sim);
    }
    if (slam_cmd->parsed()) {
      ConfigMerge merge;
      merge.load(slam_args.config, {"obs", "truth", "world", "seed", "out_dir", "particles",
                                    "v_sigma", "w_sigma", "sensor_sigma", "sensor_hit",
                                    "beam_stride", "emit_ascii_map"});
      merge.apply(slam_obs, "obs", slam_args.obs);
      merge.apply(slam_truth, "truth", slam_args.truth);
      merge.apply(slam_world, "world", slam_args.world);
      merge.apply(slam_seed, "seed", slam_args.seed);
      merge.apply(slam_out, "out_dir", slam_args.out_dir);
      merge.apply(slam_particles, "particles", slam_args.particles);
      merge.apply(slam_vs, "v_sigma", slam_args.v_sigma);
      merge.apply(slam_ws, "w_sigma", slam_args.w_sigma);
      merge.apply(slam_ss, "sensor_sigma", slam_args.sensor_sigma);
      merge.apply(slam_bs, "beam_stride", slam_args.beam_stride);
      merge.apply(slam_sh, "sensor_hit", slam_args.sensor_hit);
      merge.apply(slam_ascii, "emit_ascii_map", slam_args.emit_ascii_map);
      (void)slam_config;
      if (slam_args.obs.empty() || slam_args.world.empty() || slam_args.out_dir.empty()) {
        throw statecore::ParseError("slam needs --obs, --world, --out-dir", 0);
      }
      return cmd_slam(slam_args);
    }
    if (hf_cmd->parsed()) {
      ConfigMerge merge;
      merge.load(hf_args.config, {"obs", "truth", "world", "seed", "out_dir", "particles",
                                  "v_sigma", "w_sigma", "sensor_sigma", "sensor_hit",
                                  "beam_stride", "alpha", "disable_lec", "emit_ascii_map"});
      merge.apply(hf_obs, "obs", hf_args.obs);
      merge.apply(hf_truth, "truth", hf_args.truth);
      merge.apply(hf_world, "world", hf_args.world);
      merge.apply(hf_seed, "seed", hf_args.seed);
      merge.apply(hf_out, "out_dir", hf_args.out_dir);
      merge.apply(hf_particles, "particles", hf_args.particles);
      merge.apply(hf_vs, "v_sigma", hf_args.v_sigma);
      merge.apply(hf_ws, "w_sigma", hf_args.w_sigma);
      merge.apply(hf_ss, "sensor_sigma", hf_args.sensor_sigma);
      merge.apply(hf_bs, "beam_stride", hf_args.beam_stride);
      merge.apply(hf_sh, "sensor_hit", hf_args.sensor_hit);
      merge.apply(hf_alpha, "alpha", hf_args.alpha);
      merge.apply(hf_dl, "disable_lec", hf_args.disable_lec);
      merge.apply(hf_ascii, "emit_ascii_map", hf_args.emit_ascii_map);
      (void)hf_config;
      if (hf_args.obs.empty() || hf_args.world.empty() || hf_args.out_dir.empty()) {
        throw statecore::ParseError("hfpgm needs --obs, --world, --out-dir", 0);
      }
      return cmd_hfpgm(hf_args);
    }
    if (q_cmd->parsed()) {
      ConfigMerge merge;
      merge.load(q_args.config,
                 {"model", "seed", "out_dir", "steps", "lag", "lead", "particles"});
      merge.apply(q_model, "model", q_args.model);
      merge.apply(q_seed, "seed", q_args.seed);
      merge.apply(q_out, "out_dir", q_args.out_dir);
      merge.apply(q_steps, "steps", q_args.steps);
      merge.apply(q_lag, "lag", q_args.lag);
      merge.apply(q_lead, "lead", q_args.lead);
      merge.apply(q_n, "particles", q_args.queue_particles);
      (void)q_config;
      if (q_args.model.empty() || q_args.out_dir.empty()) {
        throw statecore::ParseError("queue-demo needs --model, --out-dir", 0);
      }
      return cmd_queue_demo(q_args);
    }
    if (g_cmd->parsed()) return cmd_validate_graph(g_args);
    if (m_cmd->parsed()) return cmd_metrics(m_args);
  } catch (const statecore::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
