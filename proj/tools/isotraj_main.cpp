// Command-line front end: ingest sensor logs, predict candidate paths from a
// history store, replay multi-day drives, and inspect the store.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <isotraj/isotraj.hpp>

namespace fs = std::filesystem;
using namespace isotraj;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_parse = 2;
constexpr int exit_config = 3;
constexpr int exit_insufficient = 4;

Config load_config_opt(const std::string& path) {
  if (path.empty()) return Config{};
  return Config::load(path);
}

SpeedModel speed_model_from(const Config& cfg) {
  if (cfg.speed_model == "constant") return SpeedModel::constant(cfg.speed_constant_mps);
  std::ifstream in(cfg.speed_profile_file);
  if (!in) throw config_error("cannot open speed profile '" + cfg.speed_profile_file + "'");
  std::vector<double> values;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    values.push_back(parse_double(line, lineno));
  }
  return SpeedModel::profile(std::move(values));
}

ParsedLog parse_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open log '" + path + "'");
  return parse_log(in);
}

Constraints load_constraints_opt(const std::string& path) {
  if (path.empty()) return Constraints{};
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open constraints '" + path + "'");
  return load_constraints(in);
}

std::vector<PathSection> load_obstacles(const std::vector<std::string>& paths) {
  std::vector<PathSection> sections;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw parse_error("cannot open obstacle fixture '" + p + "'");
    sections.push_back(section_around(load_obstacle_fixture(in)));
  }
  return sections;
}

fs::path store_file(const std::string& dir) { return fs::path(dir) / "store.txt"; }

PathStore load_store(const std::string& dir, const Config& cfg) {
  auto file = store_file(dir);
  if (!fs::exists(file)) return PathStore(cfg.store_cell_m, cfg.store_heading_bins);
  std::ifstream in(file);
  if (!in) throw config_error("cannot open store '" + file.string() + "'");
  return PathStore::load(in);
}

void save_store(const PathStore& store, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream out(store_file(dir), std::ios::binary);
  if (!out) throw config_error("cannot write store in '" + dir + "'");
  store.save(out);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write '" + path + "'");
  out << content;
}

std::string path_csv(const std::vector<PathPoint>& path) {
  std::string out = "tick,x,y,z,heading_deg,speed_mps\n";
  for (const auto& p : path) {
    out += std::to_string(p.tick);
    out += ',';
    out += format_double(p.position.x);
    out += ',';
    out += format_double(p.position.y);
    out += ',';
    out += format_double(p.position.z);
    out += ',';
    out += format_double(p.heading_deg);
    out += ',';
    out += format_double(p.speed_mps);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json candidates_geojson(const std::vector<CandidatePath>& candidates) {
  nlohmann::ordered_json fc{{"type", "FeatureCollection"},
                            {"features", nlohmann::ordered_json::array()}};
  for (const auto& c : candidates) {
    nlohmann::ordered_json coords = nlohmann::ordered_json::array();
    for (const auto& p : c.points) coords.push_back({p.x, p.y});
    fc["features"].push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
         {"properties",
          {{"id", c.id}, {"class", to_string(c.cls)}, {"likelihood", c.likelihood}}}});
  }
  return fc;
}

int run(int argc, char** argv) {
  CLI::App app{"isochronous trajectory toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file");

  auto* ingest_cmd = app.add_subcommand("ingest", "parse a sensor log and dead-reckon the path");
  std::string ingest_log, ingest_out;
  ingest_cmd->add_option("log", ingest_log, "input sensor log CSV")->required();
  ingest_cmd->add_option("--out", ingest_out, "output path CSV")->required();

  auto* predict_cmd =
      app.add_subcommand("predict", "candidate paths over the horizon from the store");
  std::string predict_store, predict_log, predict_out, predict_constraints;
  std::int64_t predict_horizon_ticks = 0;
  predict_cmd->add_option("--store", predict_store, "store directory")->required();
  predict_cmd->add_option("--log", predict_log, "current drive log")->required();
  predict_cmd->add_option("--horizon", predict_horizon_ticks, "prediction horizon in ticks");
  predict_cmd->add_option("--out", predict_out, "GeoJSON output file (default: stdout)");
  predict_cmd->add_option("--constraints", predict_constraints, "forbidden-region file");

  auto* replay_cmd = app.add_subcommand("replay", "replay day logs and score predictions");
  std::vector<std::string> replay_days;
  std::string replay_store, replay_report, replay_state_out, replay_geojson_out;
  std::string replay_constraints;
  std::vector<std::string> replay_obstacles;
  std::int64_t replay_horizon_ticks = 0;
  replay_cmd->add_option("--days", replay_days, "day logs, in day order")
      ->required()
      ->delimiter(',');
  replay_cmd->add_option("--store", replay_store, "store directory")->required();
  replay_cmd->add_option("--report", replay_report, "report file (CSV twin written alongside)")
      ->required();
  replay_cmd->add_option("--state-out", replay_state_out, "per-tick state CSV file");
  replay_cmd->add_option("--geojson-out", replay_geojson_out, "candidate paths GeoJSON file");
  replay_cmd->add_option("--constraints", replay_constraints, "forbidden-region file");
  replay_cmd->add_option("--obstacle", replay_obstacles, "obstacle fixture file (repeatable)");
  replay_cmd->add_option("--horizon", replay_horizon_ticks, "override predict.horizon_ticks");

  auto* report_cmd = app.add_subcommand("report", "summarize a store directory");
  std::string report_store;
  report_cmd->add_option("--store", report_store, "store directory")->required();

  CLI11_PARSE(app, argc, argv);

  Config cfg = load_config_opt(config_path);

  if (*ingest_cmd) {
    ParsedLog log = parse_log_file(ingest_log);
    for (const auto& g : log.gaps)
      std::cerr << "warning: " << g.gap_ms() << " ms gap before line " << g.line << "\n";
    auto path = dead_reckon(log, cfg.sensor_spec(), speed_model_from(cfg), cfg.sample_period_ms);
    write_file(ingest_out, path_csv(path));
    std::cout << "wrote " << path.size() << " points to " << ingest_out << "\n";
    return exit_ok;
  }

  if (*predict_cmd) {
    if (predict_horizon_ticks > 0) cfg.predict_horizon_ticks = predict_horizon_ticks;
    PathStore store = load_store(predict_store, cfg);
    ParsedLog log = parse_log_file(predict_log);
    auto path = dead_reckon(log, cfg.sensor_spec(), speed_model_from(cfg), cfg.sample_period_ms);
    Constraints constraints = load_constraints_opt(predict_constraints);
    auto candidates =
        predict_horizon(store, path, cfg.predict_horizon_ticks, cfg, constraints);
    auto text = candidates_geojson(candidates).dump(2) + "\n";
    if (predict_out.empty())
      std::cout << text;
    else
      write_file(predict_out, text);
    return exit_ok;
  }

  if (*replay_cmd) {
    if (replay_horizon_ticks > 0) cfg.predict_horizon_ticks = replay_horizon_ticks;
    PathStore store = load_store(replay_store, cfg);
    std::vector<ParsedLog> logs;
    for (const auto& day : replay_days) logs.push_back(parse_log_file(day));
    Constraints constraints = load_constraints_opt(replay_constraints);
    auto obstacles = load_obstacles(replay_obstacles);
    auto outputs = replay(logs, cfg, speed_model_from(cfg), store, constraints, obstacles);

    write_file(replay_report, outputs.report_text);
    write_file(replay_report + ".csv", outputs.report_csv);
    std::string state_path =
        replay_state_out.empty() ? replay_report + ".states.csv" : replay_state_out;
    write_file(state_path, outputs.state_csv);
    std::string geo_path =
        replay_geojson_out.empty() ? replay_report + ".geojson" : replay_geojson_out;
    write_file(geo_path, outputs.geojson.dump(2) + "\n");
    save_store(store, replay_store);

    std::cout << outputs.report_text;
    return exit_ok;
  }

  if (*report_cmd) {
    PathStore store = load_store(report_store, cfg);
    std::cout << "cells: " << store.cell_count() << "\n";
    std::cout << "visits: " << store.total_visits() << "\n";
    std::cout << "cell_m: " << format_double(store.cell_size()) << "\n";
    std::cout << "heading_bins: " << store.heading_bins() << "\n";
    std::cout << "days:";
    for (int d : store.days()) std::cout << " " << d;
    std::cout << "\n";
    return exit_ok;
  }

  return exit_failure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const insufficient_data_error& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return exit_insufficient;
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return exit_parse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}
