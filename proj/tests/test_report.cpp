#include <catch_amalgamated.hpp>

#include <sstream>

#include "anosov/report.hpp"

using namespace anosov;

TEST_CASE("config parsing with sections and comments") {
  Config cfg = Config::parse_string(
      "# model setup\n"
      "[model]\n"
      "name = default\n"
      "roof = 1.0\n"
      "\n"
      "[run]\n"
      "seed = 42\n"
      "tol = 1e-6\n"
      "label = a, quoted \"value\"\n");
  CHECK(cfg.get("model.name", "") == "default");
  CHECK(cfg.get_double("model.roof", 0.0) == 1.0);
  CHECK(cfg.get_int("run.seed", 0) == 42);
  CHECK(cfg.get_double("run.tol", 0.0) == 1e-6);
  CHECK(cfg.has("run.label"));
  CHECK_FALSE(cfg.has("run.missing"));
  CHECK(cfg.get("run.missing", "fallback") == "fallback");
  CHECK_THROWS_AS(cfg.require("run.missing"), std::runtime_error);
  CHECK(cfg.require("run.label") == "a, quoted \"value\"");
}

TEST_CASE("config errors carry line and column") {
  try {
    Config::parse_string("[model]\nname = ok\nbroken line\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("key = value") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse_string("[unterminated\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("key =\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string(" = value\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[]\n"), ConfigError);
  try {
    Config::parse_string("a = 1\na = 2\n");
  } catch (const ConfigError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("typed getters reject malformed values") {
  Config cfg = Config::parse_string("a = 12x\nb = 1.5.3\n");
  CHECK_THROWS_AS(cfg.get_int("a", 0), std::runtime_error);
  CHECK_THROWS_AS(cfg.get_double("b", 0.0), std::runtime_error);
}

TEST_CASE("CSV quoting follows RFC 4180") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("has,comma") == "\"has,comma\"");
  CHECK(csv_field("has\"quote") == "\"has\"\"quote\"");
  CHECK(csv_field("line\nbreak") == "\"line\nbreak\"");
  std::ostringstream os;
  csv_row(os, {"a", "b,c", "d\"e"});
  CHECK(os.str() == "a,\"b,c\",\"d\"\"e\"\r\n");
}

TEST_CASE("float formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
    std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("content hash is deterministic and sensitive") {
  std::uint64_t h1 = fnv1a("report body");
  std::uint64_t h2 = fnv1a("report body");
  std::uint64_t h3 = fnv1a("report bodY");
  CHECK(h1 == h2);
  CHECK(h1 != h3);
  CHECK(hex64(h1).size() == 16);
  CHECK(hex64(0) == "0000000000000000");
}
