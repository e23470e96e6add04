#include <doctest.h>

#include <clocale>
#include <sstream>
#include <string>

#include "gesched/errors.hpp"
#include "gesched/io.hpp"

using namespace gesched;

TEST_SUITE("io") {
  TEST_CASE("numbers use twelve significant digits") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(123456.789012345) == "123456.789012");
    CHECK(format_number(-2.5) == "-2.5");
    CHECK(format_number(1e-9) == "1e-09");
    CHECK(format_number(0.0) == "0");
  }

  TEST_CASE("number formatting ignores the locale") {
    const char* previous = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = previous ? previous : "C";
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") != nullptr) {
      CHECK(format_number(0.25) == "0.25");
    }
    std::setlocale(LC_NUMERIC, saved.c_str());
  }

  TEST_CASE("config parsing") {
    const auto c = parse_config(
        "# scheduling study\n"
        "a = 0.8\n"
        "\n"
        "lambda=2.5   # price\n"
        "n_error = 201\n"
        "allow_memoryless_violation = true\n"
        "quadrature = grid-trapezoid\n");
    CHECK(c.params.a == 0.8);
    CHECK(c.params.lambda == 2.5);
    CHECK(c.params.allow_memoryless_violation);
    CHECK(c.solver.n_error == 201);
    CHECK(c.params.p01 == 0.3);
    CHECK(c.solver.n_belief == 101);
  }

  TEST_CASE("empty config gives the defaults") {
    CHECK(parse_config("") == RunConfig{});
    CHECK(parse_config("# nothing\n\n") == RunConfig{});
  }

  TEST_CASE("config errors carry line numbers") {
    auto line_of = [](const char* text) -> std::size_t {
      try {
        parse_config(text);
      } catch (const ConfigError& e) {
        return e.line();
      }
      return 0;
    };
    CHECK(line_of("a = 0.5\nfoo = 1\n") == 2);
    CHECK(line_of("a = 0.5\n\nbeta = fast\n") == 3);
    CHECK(line_of("n_error = 20.5\n") == 1);
    CHECK(line_of("a 0.5\n") == 1);
    CHECK(line_of("a = 0.5\na = 0.6\n") == 2);
    CHECK(line_of("quadrature = gauss\n") == 1);
    try {
      parse_config("\nfoo = 1\n");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("foo") != std::string::npos);
    }
  }

  TEST_CASE("config text round-trips") {
    RunConfig c;
    c.params.a = 0.1 + 0.2;
    c.params.lambda = 1.0 / 3.0;
    c.solver.vi_tolerance = 1e-7;
    c.params.allow_memoryless_violation = true;
    CHECK(parse_config(to_text(c)) == c);
  }

  TEST_CASE("settings apply one key") {
    RunConfig c;
    apply_setting(c, " beta ", " 0.95 ");
    CHECK(c.params.beta == 0.95);
    CHECK_THROWS_AS(apply_setting(c, "gamma", "1"), ConfigError);
  }

  TEST_CASE("table csv layout") {
    Grids g;
    g.error.points = {0.0, 0.5};
    g.belief.points = {0.0, 0.25, 1.0};
    Table2D t(2, 3);
    t(1, 2) = 1.0 / 3.0;
    std::ostringstream os;
    write_table_csv(os, g, t);
    CHECK(os.str() == "e\\b,0,0.25,1\n0,0,0,0\n0.5,0,0,0.333333333333\n");
  }

  TEST_CASE("threshold csv marks never-transmit rows with an empty field") {
    ThresholdProfile p;
    p.grids.error.points = {-1.0, 0.0, 1.0};
    p.b_star = {0.4, std::nullopt, 0.4};
    std::ostringstream os;
    write_thresholds_csv(os, p);
    CHECK(os.str() == "e,b_star\n-1,0.4\n0,\n1,0.4\n");
  }

  TEST_CASE("trace csv leaves z empty on idle slots") {
    EpisodeTrace trace;
    StepRecord idle;
    idle.t = 0;
    idle.b = 0.6;
    StepRecord tx;
    tx.t = 1;
    tx.x = 1.5;
    tx.e = 1.5;
    tx.c = Channel::good;
    tx.b = 0.5;
    tx.u = Action::transmit;
    tx.z = Channel::good;
    tx.cost = 3.25;
    trace.steps = {idle, tx};
    std::ostringstream os;
    write_trace_csv(os, trace);
    CHECK(os.str() ==
          "t,x,xhat,e,c,b,u,z,cost\n0,0,0,0,0,0.6,0,,0\n1,1.5,0,1.5,1,0.5,1,1,3.25\n");
  }

  TEST_CASE("config json lists every key") {
    const auto j = to_json(RunConfig{});
    CHECK(j["params"]["a"] == 0.9);
    CHECK(j["solver"]["n_error"] == 401);
    CHECK(j["solver"]["quadrature"] == "grid-trapezoid");
    CHECK(to_key_values(RunConfig{}).size() == 12);
  }
}
