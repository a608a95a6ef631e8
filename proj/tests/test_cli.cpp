#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../tools/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int rc;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int rc = vortex::cli::run_cli(args, out, err);
  return {rc, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("VORTEX_TEST_TMP");
  const fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "vortex_cli_tests";
  const auto dir = root / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

json load(const fs::path& p) { return json::parse(slurp(p)); }

// Writes a config that keeps the commands quick.
fs::path small_config(const fs::path& dir, int charge, double depth_nm) {
  json cfg = {{"grating", {{"charge", charge}, {"depth_nm", depth_nm}}},
              {"simulation", {{"samples_per_period", 16}, {"n_lambda", 40}, {"fit_grid", 13}}}};
  const auto p = dir / "cfg.json";
  put(p, cfg.dump(2));
  return p;
}

// Adds seeded noise to the pol column of a tof CSV.
void add_noise(const fs::path& in, const fs::path& out, double sigma, unsigned seed) {
  std::ifstream src(in);
  std::ofstream dst(out);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::string line;
  std::getline(src, line);
  dst << line << '\n';
  while (std::getline(src, line)) {
    double xi = 0, pol = 0, lambda = 0;
    char c1, c2;
    std::istringstream(line) >> xi >> c1 >> pol >> c2 >> lambda;
    dst.precision(17);
    dst << xi << ',' << pol + g(rng) << ',' << lambda << '\n';
  }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("diffract writes pattern, profiles, summary and manifest") {
  const auto dir = scratch("diffract");
  const auto cfg = small_config(dir, 1, 5500.0);
  const auto r = run({"diffract", "--config", cfg.string(), "--out", dir.string()});
  REQUIRE(r.rc == 0);
  for (const char* f : {"pattern.grid", "profile_n1_plus.csv", "profile_n1_minus.csv", "profile_n3_plus.csv",
                        "profile_n3_minus.csv", "diffract_summary.json", "manifest.json"})
    CHECK(fs::exists(dir / f));
  const auto summary = load(dir / "diffract_summary.json");
  CHECK(summary["parseval_residual"].get<double>() < 1e-6);
  CHECK(summary["orders"][0]["donut"].get<bool>());
  const auto m = load(dir / "manifest.json");
  for (const char* k : {"command", "config_path", "outputs", "wall_time", "toolkit_version", "content_hash"})
    CHECK(m.contains(k));
  CHECK(m["outputs"].size() == 6);
  CHECK(m["content_hash"].get<std::string>().size() == 64);
}

TEST_CASE("straight grating reports no donut") {
  const auto dir = scratch("straight");
  const auto cfg = small_config(dir, 0, 5500.0);
  REQUIRE(run({"diffract", "--config", cfg.string(), "--out", dir.string()}).rc == 0);
  const auto summary = load(dir / "diffract_summary.json");
  for (const auto& o : summary["orders"]) {
    if (o.contains("skipped")) continue;
    CHECK_FALSE(o["donut"].get<bool>());
    CHECK(o["peak_radius_per_nm"].is_null());
  }
}

TEST_CASE("user errors exit with 2 and a JSON error") {
  const auto dir = scratch("errors");
  auto r = run({"diffract", "--config", (dir / "missing.json").string(), "--out", dir.string()});
  CHECK(r.rc == 2);
  const auto e = json::parse(r.err);
  CHECK(e["error"]["exit_code"] == 2);
  CHECK(e["error"]["message"].get<std::string>().find("missing.json") != std::string::npos);

  put(dir / "empty.csv", "");
  r = run({"fit", "--data", (dir / "empty.csv").string(), "--out", dir.string()});
  CHECK(r.rc == 2);
  CHECK(json::parse(r.err)["error"]["message"].get<std::string>().find("empty") != std::string::npos);

  put(dir / "short.csv", "xi_nm,pol\n1500,0.9\n2000,0.8\n");
  CHECK(run({"fit", "--data", (dir / "short.csv").string(), "--out", dir.string()}).rc == 2);

  CHECK(run({"diffract", "--set", "grating.chrge=2", "--out", dir.string()}).rc == 2);
  CHECK(run({"diffract", "--set", "grating.duty=1.5", "--out", dir.string()}).rc == 2);
  CHECK(run({"sesans", "--mode", "cube", "--out", dir.string()}).rc == 2);
  CHECK(run({"sesans", "--mode", "map", "--stack", "2", "--out", dir.string()}).rc == 2);
  CHECK(run({"frobnicate"}).rc == 2);
  CHECK(run({}).rc == 2);
  CHECK(run({"--help"}).rc == 0);
  CHECK_FALSE(fs::exists(dir / "manifest.json"));
}

TEST_CASE("outputs are bit-identical across runs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto cfg = small_config(a, 2, 5500.0);
  for (const auto& d : {a, b}) {
    REQUIRE(run({"sesans", "--mode", "tof", "--config", cfg.string(), "--out", d.string()}).rc == 0);
    REQUIRE(run({"diffract", "--config", cfg.string(), "--out", d.string()}).rc == 0);
  }
  for (const char* f : {"sesans_tof.csv", "sesans_tof.json", "profile_n1_plus.csv", "pattern.grid"})
    CHECK(slurp(a / f) == slurp(b / f));
  CHECK(load(a / "manifest.json")["content_hash"] == load(b / "manifest.json")["content_hash"]);
}

TEST_CASE("content hash follows the input bytes") {
  const auto dir = scratch("hash");
  const auto cfg = small_config(dir, 1, 5500.0);
  auto hash = [&] {
    REQUIRE(run({"xi", "--config", cfg.string(), "--out", dir.string()}).rc == 0);
    return load(dir / "manifest.json")["content_hash"].get<std::string>();
  };
  const auto h1 = hash();
  CHECK(hash() == h1);
  // formatting change in the file changes the hash even though the parsed config does not
  put(cfg, slurp(cfg) + "\n");
  const auto h2 = hash();
  CHECK(h2 != h1);
  CHECK(vortex::cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(vortex::cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("sesans modes, stacking and orientation") {
  const auto dir = scratch("sesans");
  const auto cfg = small_config(dir, 1, 5500.0);
  REQUIRE(run({"sesans", "--mode", "map", "--config", cfg.string(), "--out", dir.string()}).rc == 0);
  CHECK(fs::exists(dir / "sesans_map.csv"));
  CHECK(load(dir / "sesans_map.json").is_object());

  REQUIRE(run({"sesans", "--mode", "slice", "--orientation", "90", "--config", cfg.string(), "--set",
               "simulation.slice_points=21", "--out", dir.string()})
              .rc == 0);
  const auto slice = load(dir / "sesans_slice.json");
  CHECK(slice["orientation_deg"] == 90.0);
  CHECK(slice["points"] == 21);
  CHECK(slice["mode"] == "monochromatic");

  REQUIRE(run({"sesans", "--mode", "tof", "--stack", "3", "--resolution", "off", "--config", cfg.string(), "--out",
               dir.string()})
              .rc == 0);
  for (const char* f : {"sesans_tof.csv", "sesans_tof_stack3.csv", "sesans_tof_equiv3.csv"})
    CHECK(fs::exists(dir / f));
  const auto tof = load(dir / "sesans_tof.json");
  CHECK_FALSE(tof["resolution"]["applied"].get<bool>());
  CHECK(tof["points"] == 40);
  CHECK(tof["band_nm"][1] == 1.05);
  CHECK(load(dir / "sesans_tof_equiv3.json")["grating"]["depth_nm"].get<double>() ==
        doctest::Approx(5500.0 * std::sqrt(3.0)));
}

TEST_CASE("flags override --set which overrides the config file") {
  const auto dir = scratch("precedence");
  const auto cfg = small_config(dir, 1, 5500.0);
  REQUIRE(run({"sesans", "--mode", "slice", "--config", cfg.string(), "--set", "simulation.orientation_deg=30",
               "--set", "simulation.slice_points=11", "--orientation", "45", "--out", dir.string()})
              .rc == 0);
  CHECK(load(dir / "sesans_slice.json")["orientation_deg"] == 45.0);
  REQUIRE(run({"sesans", "--mode", "slice", "--config", cfg.string(), "--set", "simulation.orientation_deg=30",
               "--set", "simulation.slice_points=11", "--out", dir.string()})
              .rc == 0);
  CHECK(load(dir / "sesans_slice.json")["orientation_deg"] == 30.0);
}

TEST_CASE("fit recovers a synthetic depth and penalizes the wrong charge") {
  const auto dir = scratch("fit");
  const auto gen = small_config(dir, 1, 4200.0);
  REQUIRE(run({"sesans", "--mode", "tof", "--config", gen.string(), "--out", dir.string()}).rc == 0);
  add_noise(dir / "sesans_tof.csv", dir / "data.csv", 0.002, 3);

  const auto matched = scratch("fit_m1");
  const auto cfg1 = small_config(matched, 1, 5500.0);
  auto r = run({"fit", "--data", (dir / "data.csv").string(), "--config", cfg1.string(), "--out", matched.string()});
  REQUIRE(r.rc == 0);
  CHECK(r.out.find("d_best_nm") != std::string::npos);
  const auto rep1 = load(matched / "fit_report.json");
  CHECK(std::abs(rep1["d_best_nm"].get<double>() - 4200.0) < 50.0);
  CHECK(fs::exists(matched / "fit_overlay.csv"));
  CHECK(load(matched / "manifest.json")["content_hash"] != vortex::cli::sha256_hex(""));

  const auto wrong = scratch("fit_m2");
  const auto cfg2 = small_config(wrong, 2, 5500.0);
  REQUIRE(run({"fit", "--data", (dir / "data.csv").string(), "--config", cfg2.string(), "--out", wrong.string()}).rc ==
          0);
  const auto rep2 = load(wrong / "fit_report.json");
  CHECK(rep2["sse"].get<double>() >= 5.0 * rep1["sse"].get<double>());
}

TEST_CASE("fit column selection") {
  const auto dir = scratch("fit_cols");
  std::string csv = "\xEF\xBB\xBF\"P\",\"XI\"\n";
  for (int i = 0; i < 12; ++i) csv += "0.9," + std::to_string(1500 + 1000 * i) + "\n";
  csv += "n/a,n/a\n";
  put(dir / "d.csv", csv);
  const std::vector<std::string> base = {"fit", "--data", (dir / "d.csv").string(), "--out", dir.string(),
                                         "--set", "simulation.samples_per_period=16", "--set",
                                         "simulation.fit_grid=3"};
  auto args = base;
  CHECK(run(args).rc == 2);  // default column names absent
  args.insert(args.end(), {"--xi-col", "XI", "--pol-col", "P"});
  REQUIRE(run(args).rc == 0);
  CHECK(load(dir / "fit_report.json")["points_used"].get<int>() > 0);
  args.insert(args.end(), {"--lambda-col", "L"});
  CHECK(run(args).rc == 2);
}

TEST_CASE("donut and xi commands") {
  const auto dir = scratch("donut");
  REQUIRE(run({"donut", "--n", "1", "--set", "grating.charge=2", "--points", "50", "--out", dir.string()}).rc == 0);
  const auto csv = slurp(dir / "donut_n1_m2.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
  CHECK(run({"donut", "--n", "0", "--out", dir.string()}).rc == 2);

  REQUIRE(run({"xi", "--lambda", "0.4", "--lambda", "1.0", "--out", dir.string()}).rc == 0);
  const auto xi = load(dir / "xi.json");
  CHECK(xi["xi_range_nm"][0].get<double>() == doctest::Approx(1233.0));
  CHECK(xi["xi_range_nm"][1].get<double>() == doctest::Approx(15104.25));
  CHECK(xi["relative_difference"].get<double>() < 0.10);
  CHECK(xi["points"].size() == 2);
  CHECK(slurp(dir / "xi_table.csv").rfind("lambda_nm,xi_nm\n", 0) == 0);
}

}  // TEST_SUITE
