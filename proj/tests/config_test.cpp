#include "catch_amalgamated.hpp"

#include <string>

#include "lsde/config.hpp"
#include "lsde/errors.hpp"

using namespace lsde;

namespace {

const std::string kSingle = R"(version: 1
model: single
gamma: 0.75
d: 2
initial:
  points:
    - site: [0, 0]
      mass: 1.5
    - site: [2, -1]
      mass: 0.25
dt: 0.01
t_end: 1
t_grid: [0.5, 1]
n_replicas: 300
master_seed: 9
)";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("a minimal config parses with defaults") {
  const RunConfig c = parse_config(kSingle);
  CHECK(c.model == ModelKind::single);
  CHECK(c.gamma == 0.75);
  CHECK(c.d == 2);
  CHECK(c.scheme == Scheme::split);
  CHECK(c.output.path == "lsde_out");
  CHECK(c.grid() == std::vector<double>{0.5, 1});
  const LatticeState u = c.initial.build(2);
  CHECK(u.at(Site{2, -1}) == 0.25);
  CHECK(c.params().generator.qnorm() == 4.0);
  const TrajectoryConfig t = c.trajectory();
  CHECK(t.dt == 0.01);
  CHECK(t.seed == 9);
  CHECK_FALSE(t.box);
}

TEST_CASE("emitted configs parse back to the same value") {
  for (const std::string& name : {"single", "cutoff", "catalytic", "feller", "envelope"}) {
    INFO(name);
    const RunConfig c = load_config(std::string(LSDE_SOURCE_DIR) + "/configs/" + name + ".yaml");
    const std::string text = emit_config(c);
    CHECK(parse_config(text) == c);
    CHECK(emit_config(parse_config(text)) == text);
  }
  RunConfig odd = parse_config(kSingle);
  odd.dt = 0.1 / 3;
  odd.t_end = 1.0 / 3;
  odd.t_grid = {0.1, 1.0 / 3};
  odd.generator.laplacian = false;
  odd.generator.jumps = {{{1, 0}, 0.3}, {{-1, 0}, 0.3}, {{0, 2}, 0.1 / 7}, {{0, -2}, 0.1 / 7}};
  CHECK(parse_config(emit_config(odd)) == odd);
}

TEST_CASE("unknown fields are rejected with their line") {
  CHECK(error_line(kSingle + "colour: blue\n") == 16);
  CHECK(error_line("model: single\ninitial:\n  points: []\n  flavour: 1\n") == 4);
  CHECK_THROWS_WITH(parse_config(kSingle + "colour: blue\n"), Catch::Matchers::ContainsSubstring("colour"));
}

TEST_CASE("type and value errors are config errors") {
  CHECK(error_line("model: single\ngamma: high\n") == 2);
  CHECK(error_line("model: single\nd: 7\n") == 2);
  CHECK(error_line("model: sideways\n") == 1);
  CHECK(error_line("gamma: 0.5\n") == 1);
  CHECK(error_line("model: single\ngamma: 0.3\n") == 2);
  CHECK(error_line("model: single\nn_replicas: 0\n") == 2);
  CHECK(error_line("model: single\nversion: 2\n") == 2);
  CHECK(error_line("model: [unclosed\n") > 0);
  CHECK(error_line("model: cutoff\nbox_radius: 2\ninitial:\n  points:\n    - site: [5]\n      mass: 1\n") > 0);
  CHECK_THROWS_AS(load_config("/nonexistent/run.yaml"), ConfigError);
}

TEST_CASE("the stability bound is a numeric guard, not a config error") {
  CHECK_THROWS_AS(parse_config("model: single\ndt: 0.2\n"), NumericGuardError);
  CHECK_THROWS_AS(parse_config("model: single\nd: 4\ndt: 0.03\n"), NumericGuardError);
}

TEST_CASE("model-specific mapping") {
  const RunConfig cut = parse_config("model: cutoff\nbox_radius: 3\ninitial:\n  points:\n    - site: [1]\n      mass: 2\n");
  REQUIRE(cut.trajectory().box);
  CHECK(cut.trajectory().box->radius() == 3);
  const RunConfig env = parse_config("model: catalytic\ninitial:\n  type: envelope\n  lambda: 2\n  c: 0.5\n  radius: 4\n");
  const LatticeState u = env.initial.build(1);
  CHECK(u.support_size() == 9);
  CHECK(u.at(Site{0}) == 0.5);
  CHECK(model_name(ModelKind::feller) == "feller");
}
