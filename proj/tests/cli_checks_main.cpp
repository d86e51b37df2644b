// End-to-end checks of the command-line tool: exit codes, output files and
// the documented error surfaces.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("%s %s%s%s\n", pass ? "ok" : "FAIL", name.c_str(), detail.empty() ? "" : " -- ",
              detail.c_str());
  if (!pass) ++failures;
}

int run(const std::string& args, const fs::path& stdout_file, const fs::path& stderr_file) {
  std::string cmd = std::string(ISOTRAJ_CLI_PATH) + " " + args + " > " + stdout_file.string() +
                    " 2> " + stderr_file.string();
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

int main() {
  fs::path root = fs::temp_directory_path() / "isotraj_cli_checks";
  fs::remove_all(root);
  fs::create_directories(root);
  fs::path out = root / "stdout.txt";
  fs::path err = root / "stderr.txt";

  // good three-tick log, heading east
  fs::path good_log = root / "good.csv";
  write(good_log, "timestamp_ms,mx,my\n0,512,0\n20,512,0\n40,512,0\n");

  {
    fs::path path_out = root / "path.csv";
    int code = run("ingest " + good_log.string() + " --out " + path_out.string(), out, err);
    check("ingest succeeds on a valid log", code == 0);
    auto text = slurp(path_out);
    check("ingest writes the path CSV header",
          text.rfind("tick,x,y,z,heading_deg,speed_mps\n", 0) == 0);
  }

  {
    fs::path bad_log = root / "bad.csv";
    write(bad_log, "timestamp_ms,mx,my\n0,512,0\n20,abc,0\n");
    int code = run("ingest " + bad_log.string() + " --out " + (root / "x.csv").string(), out, err);
    check("corrupted log exits with code 2", code == 2);
    check("parse error names the line", slurp(err).find("line 3") != std::string::npos);
  }

  {
    fs::path cfg = root / "bad.cfg";
    write(cfg, "chords.gama = 0.5\n");
    int code = run("--config " + cfg.string() + " ingest " + good_log.string() + " --out " +
                       (root / "y.csv").string(),
                   out, err);
    check("unknown config key exits with code 3", code == 3);
  }

  {
    fs::path short_log = root / "short.csv";
    write(short_log, "timestamp_ms,mx,my\n0,512,0\n");
    int code =
        run("ingest " + short_log.string() + " --out " + (root / "z.csv").string(), out, err);
    check("single-sample log exits with code 4", code == 4);
  }

  {
    fs::path store = root / "store_empty";
    int code = run("predict --store " + store.string() + " --log " + good_log.string() +
                       " --horizon 10",
                   out, err);
    std::string text = slurp(out);
    check("predict on an empty store succeeds", code == 0);
    check("predict emits a GeoJSON FeatureCollection",
          text.find("\"FeatureCollection\"") != std::string::npos);
    check("the single extrapolated candidate is green",
          text.find("\"class\": \"green\"") != std::string::npos);
  }

  {
    fs::path store = root / "store_replay";
    fs::path report = root / "report.txt";
    int code = run("replay --days " + good_log.string() + " --store " + store.string() +
                       " --report " + report.string(),
                   out, err);
    check("replay succeeds and writes its outputs", code == 0);
    check("report file exists", fs::exists(report));
    check("report CSV twin exists", fs::exists(report.string() + ".csv"));
    check("state CSV exists", fs::exists(report.string() + ".states.csv"));
    check("GeoJSON exists", fs::exists(report.string() + ".geojson"));
    check("store persisted", fs::exists(store / "store.txt"));

    int code2 = run("report --store " + store.string(), out, err);
    check("report subcommand succeeds", code2 == 0);
    check("report lists the ingested day", slurp(out).find("days: 1") != std::string::npos);

    // replaying the identical day against the same store is a duplicate
    int code3 = run("replay --days " + good_log.string() + " --store " + store.string() +
                        " --report " + report.string(),
                    out, err);
    check("duplicate day replay fails", code3 != 0);
  }

  fs::remove_all(root);
  if (failures) {
    std::printf("%d cli check(s) failed\n", failures);
    return 1;
  }
  std::printf("all cli checks passed\n");
  return 0;
}
