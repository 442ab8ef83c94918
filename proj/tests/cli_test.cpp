#include "catch_amalgamated.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + LSDE_CLI_PATH + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  for (std::size_t k; (k = fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, k);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::temp_directory_path() / ("lsde_cli_test_" + std::to_string(::getpid()))) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
};

const std::string kSmall = R"(model: single
gamma: 0.75
initial:
  points:
    - site: [0]
      mass: 0.1
dt: 0.002
t_end: 0.2
t_grid: [0.1, 0.2]
n_replicas: 100
master_seed: 5
moments:
  mass_times: [0.2]
)";

}  // namespace

TEST_CASE("simulate writes trajectories and a curve") {
  Scratch s;
  const std::string cfg = s.write("run.yaml", kSmall);
  const std::string prefix = (s.dir / "out" / "a").string();
  const Run r = run("simulate " + cfg + " --out " + prefix);
  REQUIRE(r.code == 0);
  std::istringstream jl(slurp(prefix + ".trajectories.jsonl"));
  std::string line;
  std::getline(jl, line);
  const auto head = nlohmann::json::parse(line);
  CHECK(head["schema"] == "lsde.trajectory");
  CHECK(head["n_replicas"] == 100);
  int n = 0;
  while (std::getline(jl, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["replica"] == n);
    ++n;
  }
  CHECK(n == 100);
  const std::string curve = slurp(prefix + ".curve.csv");
  CHECK(curve.rfind("# lsde.curve v1\n", 0) == 0);
  CHECK(curve.find("series,t,p_hat") != std::string::npos);
}

TEST_CASE("outputs do not depend on the thread count and seeds override") {
  Scratch s;
  const std::string cfg = s.write("run.yaml", kSmall);
  const std::string a = (s.dir / "a").string(), c = (s.dir / "c").string();
  REQUIRE(run("curve " + cfg + " --out " + a, "LSDE_THREADS=1").code == 0);
  const std::string one = slurp(a + ".curve.csv");
  REQUIRE(run("curve " + cfg + " --out " + a, "LSDE_THREADS=4").code == 0);
  CHECK(slurp(a + ".curve.csv") == one);
  auto second_line = [](const std::string& text) {
    const auto a = text.find('\n') + 1;
    return text.substr(a, text.find('\n', a) - a);
  };
  REQUIRE(run("simulate " + cfg + " --out " + a).code == 0);
  REQUIRE(run("simulate " + cfg + " --out " + c + " --seed 6").code == 0);
  CHECK(second_line(slurp(a + ".trajectories.jsonl")) != second_line(slurp(c + ".trajectories.jsonl")));
  CHECK(slurp(c + ".curve.csv").find("master_seed: 6") != std::string::npos);
}

TEST_CASE("moments reports pass lines and a csv") {
  Scratch s;
  const std::string cfg = s.write("run.yaml", kSmall);
  const std::string prefix = (s.dir / "m").string();
  const Run r = run("moments " + cfg + " --out " + prefix);
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS mass") != std::string::npos);
  CHECK(slurp(prefix + ".moments.csv").rfind("# lsde.moments v1\n", 0) == 0);
}

TEST_CASE("config errors exit with 2 and guard violations with 3, writing nothing") {
  Scratch s;
  const std::string prefix = (s.dir / "x").string();
  CHECK(run("simulate " + s.write("bad.yaml", kSmall + "colour: red\n") + " --out " + prefix).code == 2);
  CHECK(run("simulate " + (s.dir / "missing.yaml").string()).code == 2);
  std::string few = kSmall;
  few.replace(few.find("n_replicas: 100"), 15, "n_replicas: 10");
  CHECK(run("curve " + s.write("few.yaml", few) + " --out " + prefix).code == 2);
  CHECK_FALSE(fs::exists(prefix + ".curve.csv"));
  std::string guarded = kSmall;
  guarded.replace(guarded.find("dt: 0.002"), 9, "dt: 0.2");
  CHECK(run("simulate " + s.write("guard.yaml", guarded) + " --out " + prefix).code == 3);
  CHECK_FALSE(fs::exists(prefix + ".curve.csv"));
  CHECK_FALSE(fs::exists(prefix + ".trajectories.jsonl"));
  CHECK(run("simulate " + s.write("run.yaml", kSmall) + " --threads 2").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("kernel table") {
  const Run r = run("kernel --d 1 --t 0,1 --x 0:1 --rate 1");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::vector<std::string> l;
  for (std::string s; std::getline(in, s);) l.push_back(s);
  REQUIRE(l.size() == 6);
  CHECK(l[0] == "# lsde.kernel v1");
  CHECK(l[1] == "t,x1,p,lower,upper");
  CHECK(l[2].rfind("0,0,1,", 0) == 0);
  CHECK(l[3].rfind("0,1,0,", 0) == 0);
  CHECK(l[4].rfind("1,0,0.4657596", 0) == 0);
  CHECK(run("kernel --d 9").code == 2);
  CHECK(run("kernel --x 3:1").code == 2);
  CHECK(run("kernel --t -1").code == 2);
}

TEST_CASE("verify suites") {
  const Run r = run("verify kernel");
  CHECK(r.code == 0);
  CHECK(r.out.find("\"summary\":\"kernel\"") != std::string::npos);
  CHECK(r.out.find("\"failed\":0") != std::string::npos);
  CHECK(run("verify nonsense").code == 2);
}
