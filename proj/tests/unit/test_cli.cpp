#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chronos/cli.hpp"
#include "chronos/io.hpp"
#include "chronos/problems.hpp"

using namespace chronos;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "chronos");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path p = fs::temp_directory_path() / ("chronos-cli-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

std::vector<std::vector<std::string>> read_csv(const std::string& file) {
  std::ifstream in(file);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const std::string& bus_policy_file() {
  static const std::string file = [] {
    const std::string p = path("bus_policy.json");
    const Run r = cli({"solve", "bus", "--beliefs", "5000", "--seed", "7", "-o", p});
    REQUIRE(r.status == 0);
    return p;
  }();
  return file;
}

}  // namespace

TEST_CASE("validate") {
  const Run r = cli({"validate", "bus"});
  CHECK(r.status == 0);
  CHECK(r.out.find("0 violations") != std::string::npos);
  CHECK(cli({"validate", "maintenance", "--observation-bins", "40"}).status == 0);

  nlohmann::json doc = nlohmann::json::parse(dump_model(build_bus_problem()));
  doc["transition"][2][1][0] = 0.25;
  write_file(path("broken.json"), doc.dump());
  const Run bad = cli({"validate", path("broken.json")});
  CHECK(bad.status == 1);
  CHECK(bad.out.find("transition_row") != std::string::npos);
  CHECK(bad.out.find("missing_sojourn") != std::string::npos);
  CHECK(bad.out.find("2 violations") != std::string::npos);
}

TEST_CASE("missing model file") {
  const Run r = cli({"solve", "missing.json"});
  CHECK(r.status == 1);
  CHECK(r.err.find("missing.json") != std::string::npos);
}

TEST_CASE("bad arguments") {
  CHECK(cli({}).status != 0);
  CHECK(cli({"solve", "bus", "--beliefs", "0"}).status != 0);
  CHECK(cli({"frobnicate"}).status != 0);
  CHECK(cli({"--help"}).status == 0);
}

TEST_CASE("collect") {
  const Run r = cli({"collect", "bus", "--beliefs", "100", "--seed", "1", "-o", path("bank.json")});
  REQUIRE(r.status == 0);
  const auto doc = nlohmann::json::parse(read_file(path("bank.json")));
  CHECK(doc["times"].size() == 99);
  CHECK(doc["beliefs"].size() == 100);
  double sum = 0.0;
  for (const auto& w : doc["weights"]) sum += w["w"].get<double>();
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(doc["seed"] == 1);
  cli({"collect", "bus", "--beliefs", "100", "--seed", "1", "-o", path("bank2.json")});
  CHECK(read_file(path("bank.json")) == read_file(path("bank2.json")));
}

TEST_CASE("solve and simulate maintenance") {
  const std::string p1 = path("m1.json"), p2 = path("m2.json");
  const Run a = cli({"solve", "maintenance", "--beliefs", "1000", "--max-iters", "40", "--seed", "7", "-o", p1,
                     "--trace", path("trace.txt")});
  REQUIRE(a.status == 0);
  CHECK(a.err.find("constant alpha") != std::string::npos);
  CHECK(read_file(path("trace.txt")).find("|V|=") != std::string::npos);
  cli({"solve", "maintenance", "--beliefs", "1000", "--max-iters", "40", "--seed", "7", "-o", p2});
  CHECK(read_file(p1) == read_file(p2));

  const Run s1 = cli({"simulate", "maintenance", p1, "--episodes", "1000", "--seed", "3"});
  const Run s2 = cli({"simulate", "maintenance", p1, "--episodes", "1000", "--seed", "3"});
  REQUIRE(s1.status == 0);
  CHECK(s1.out == s2.out);
  CHECK(s1.out.find("mean discounted return") != std::string::npos);
  CHECK(s1.out.find("SE") != std::string::npos);

  // a policy for one model is refused by another
  const Run wrong = cli({"simulate", "maintenance", p1, "--observation-bins", "50"});
  CHECK(wrong.status == 1);
  CHECK(wrong.err.find(p1) != std::string::npos);

  const Run traj = cli({"simulate", "maintenance", p1, "--episodes", "2", "--epochs", "7", "--trajectory",
                        path("traj.csv")});
  REQUIRE(traj.status == 0);
  const auto rows = read_csv(path("traj.csv"));
  CHECK(rows.size() == 8);
  CHECK(rows[0].front() == "epoch");
  CHECK(rows[0].back() == "discounted_reward_so_far");
}

TEST_CASE("explicit initial alpha and non-convergence") {
  const std::string p = path("short.json");
  const Run r = cli({"solve", "bus", "--beliefs", "300", "--max-iters", "1", "--initial-alpha", "0", "-o", p});
  CHECK(r.status == 2);
  REQUIRE(fs::exists(p));
  const auto doc = nlohmann::json::parse(read_file(p));
  CHECK(doc["converged"] == false);
  CHECK(doc["trace"].size() == 1);
}

TEST_CASE("threads do not change the policy") {
  const std::string a = path("t1.json"), b = path("t2.json");
  REQUIRE(cli({"solve", "bus", "--beliefs", "400", "--seed", "3", "-o", a}).status == 0);
  REQUIRE(cli({"solve", "bus", "--beliefs", "400", "--seed", "3", "--threads", "2", "-o", b}).status == 0);
  CHECK(read_file(a) == read_file(b));
}

TEST_CASE("export-model writes a loadable file") {
  REQUIRE(cli({"export-model", "maintenance", "-o", path("maint.json")}).status == 0);
  CHECK(cli({"validate", path("maint.json")}).status == 0);
  CHECK(load_model_file(path("maint.json")).data() == build_maintenance_problem().data());
}

TEST_CASE("mesh export") {
  const std::string mesh = path("mesh.csv");
  const Run r = cli({"export-mesh", "bus", bus_policy_file(), "--mesh-resolution", "6", "-o", mesh});
  REQUIRE(r.status == 0);
  const auto rows = read_csv(mesh);
  REQUIRE(!rows.empty());
  CHECK(rows[0] == std::vector<std::string>{"observable", "belief_1", "belief_2", "belief_3", "action", "value"});
  CHECK(rows.size() - 1 == 5 * 28);  // C(6 + 2, 2) points per stop

  std::map<std::string, std::size_t> per_stop;
  for (std::size_t i = 1; i < rows.size(); ++i) ++per_stop[rows[i][0]];
  for (const auto& [stop, n] : per_stop) CHECK(n == 28);

  const auto action_at = [&](const std::string& stop, const std::string& b1, const std::string& b2,
                             const std::string& b3) {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i][0] == stop && rows[i][1] == b1 && rows[i][2] == b2 && rows[i][3] == b3) return rows[i][4];
    return std::string("?");
  };
  CHECK(action_at("0", "0.33333333333333331", "0.33333333333333331", "0.33333333333333331") == "bus");
  CHECK(action_at("0", "0", "0", "1") == "bike");
  CHECK(action_at("3", "1", "0", "0") == "bus");
  CHECK(action_at("3", "0", "0", "1") == "bike");

  // a model without the observable/hidden factorization cannot be meshed
  const Run m = cli({"export-mesh", "maintenance", bus_policy_file()});
  CHECK(m.status == 1);

  // a modified model no longer matches the policy
  nlohmann::json doc = nlohmann::json::parse(dump_model(build_bus_problem()));
  doc["beta"] = 0.03;
  write_file(path("bus_fast.json"), doc.dump());
  const Run mismatch = cli({"export-mesh", path("bus_fast.json"), bus_policy_file()});
  CHECK(mismatch.status == 1);
  CHECK(mismatch.err.find("policy was computed for model") != std::string::npos);
}

TEST_CASE("installed executable") {
  const std::string cmd = std::string(CHRONOS_CLI_PATH) + " validate bus > " + path("validate.txt");
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(read_file(path("validate.txt")) == "0 violations\n");
}
