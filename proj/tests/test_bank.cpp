#include <filesystem>

#include "doctest.h"
#include "examforge/bank.hpp"
#include "examforge/error.hpp"
#include "test_support.hpp"

using namespace examforge;
using testing::make_bank;
using testing::make_problem;

namespace {

bool has_rule(const std::vector<ValidationIssue>& issues, const std::string& rule) {
  for (const auto& i : issues) {
    if (i.rule == rule) return true;
  }
  return false;
}

const char* kManifest = R"({
  "schema_version": 1,
  "subareas": {"PID": "PID control", "FREQ": "Frequency methods"},
  "problems": [
    {"id": "P1", "subarea": "PID", "points": 5, "ilo_refs": ["ILO1"], "solo_level": 3,
     "difficulty": 0.4, "statement_path": "p/P1.tex", "solution_path": "s/P1.tex",
     "usage_dates": ["2021-06-01"]},
    {"id": "P2", "subarea": "FREQ", "points": 10, "ilo_refs": ["ILO2"], "solo_level": 4,
     "difficulty": 0.7, "statement_path": "p/P2.tex", "solution_path": "s/P2.tex",
     "usage_dates": []}
  ]
}
)";

}  // namespace

TEST_CASE("load a bank from disk") {
  testing::TempDir dir;
  testing::write_file(dir.path() / "bank.json", kManifest);
  for (auto f : {"p/P1.tex", "s/P1.tex", "p/P2.tex", "s/P2.tex"}) testing::write_file(dir.path() / f, "x\n");
  const Bank bank = load_bank(dir.path());
  REQUIRE(bank.problems.size() == 2);
  CHECK(bank.at("P1").usage_dates.front() == Date::parse("2021-06-01"));
  CHECK(bank.at("P2").difficulty == doctest::Approx(0.7));
  CHECK(bank.subareas.at("PID") == "PID control");
  CHECK(validate_bank(bank).ok());
  CHECK(read_fragment(bank, bank.at("P1"), false) == "x\n");
}

TEST_CASE("save then load is identity and the manifest is canonical") {
  testing::TempDir dir;
  Bank bank = make_bank({make_problem("Q2", "B", 10, 0.7, 4, {"I1", "I2"}, {"2020-01-01", "2022-05-05"}),
                         make_problem("Q1", "A", 5, 0.25)});
  testing::write_bank_dir(bank, dir.path());
  save_bank(bank, dir.path());
  const std::string first = testing::read_file(dir.path() / "bank.json");
  const Bank loaded = load_bank(dir.path());
  CHECK(loaded == bank);
  save_bank(loaded, dir.path());
  CHECK(testing::read_file(dir.path() / "bank.json") == first);
  CHECK(first == serialize_manifest(bank));
  CHECK(bank_fingerprint(loaded) == bank_fingerprint(bank));
  CHECK(bank_fingerprint(record_usage(bank, {"Q1"}, Date::parse("2024-01-01"))) != bank_fingerprint(bank));
  // Canonical key order.
  CHECK(first.find("\"schema_version\"") < first.find("\"subareas\""));
  CHECK(first.find("\"subareas\"") < first.find("\"problems\""));
  CHECK(first.back() == '\n');
}

TEST_CASE("load errors name the location") {
  testing::TempDir dir;
  SUBCASE("missing key") {
    std::string text = kManifest;
    text.replace(text.find("\"points\": 5, "), 13, "");
    testing::write_file(dir.path() / "bank.json", text);
    try {
      load_bank(dir.path());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBankLoad);
      CHECK(std::string(e.what()).find("P1") != std::string::npos);
      CHECK(std::string(e.what()).find("points") != std::string::npos);
    }
  }
  SUBCASE("malformed json") {
    testing::write_file(dir.path() / "bank.json", "{ \"schema_version\": 1, ");
    CHECK_THROWS_AS(load_bank(dir.path()), Error);
  }
  SUBCASE("unsupported schema version") {
    std::string text = kManifest;
    text.replace(text.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
    testing::write_file(dir.path() / "bank.json", text);
    CHECK_THROWS_AS(load_bank(dir.path()), Error);
  }
  SUBCASE("missing manifest") { CHECK_THROWS_AS(load_bank(dir.path()), Error); }
}

TEST_CASE("unknown keys become warnings; duplicates are collected") {
  testing::TempDir dir;
  std::string text = kManifest;
  text.replace(text.find("\"usage_dates\": []"), 17, "\"usage_dates\": [], \"author\": \"x\"");
  testing::write_file(dir.path() / "bank.json", text);
  for (auto f : {"p/P1.tex", "s/P1.tex", "p/P2.tex", "s/P2.tex"}) testing::write_file(dir.path() / f, "x\n");
  const Bank bank = load_bank(dir.path());
  const auto report = validate_bank(bank);
  CHECK(report.ok());
  CHECK(has_rule(report.warnings, "unknown_key"));

  std::string dup = kManifest;
  dup.replace(dup.find("\"id\": \"P2\""), 10, "\"id\": \"P1\"");
  testing::write_file(dir.path() / "bank.json", dup);
  ValidationReport issues;
  load_bank_collecting(dir.path(), issues);
  CHECK(has_rule(issues.errors, "duplicate_id"));
  CHECK_THROWS_AS(load_bank(dir.path()), Error);
}

TEST_CASE("validation rules") {
  auto bank = make_bank({make_problem("A1", "A", 5)});
  CHECK(validate_bank(bank).ok());

  auto bad = bank;
  bad.problems[0].points = 0;
  CHECK(has_rule(validate_bank(bad).errors, "points_positive"));
  bad = bank;
  bad.problems[0].difficulty = 1.5;
  CHECK(has_rule(validate_bank(bad).errors, "difficulty_range"));
  bad = bank;
  bad.problems[0].solo_level = 6;
  CHECK(has_rule(validate_bank(bad).errors, "solo_range"));
  bad = bank;
  bad.problems[0].usage_dates = {Date::parse("2022-01-01"), Date::parse("2021-01-01")};
  CHECK(has_rule(validate_bank(bad).errors, "usage_dates_order"));
  bad = bank;
  bad.problems[0].subarea = "ZZ";
  CHECK(has_rule(validate_bank(bad).errors, "unknown_subarea"));
  bad = bank;
  bad.problems.push_back(bad.problems[0]);
  CHECK(has_rule(validate_bank(bad).errors, "duplicate_id"));
  CHECK_THROWS_AS(require_valid(bad), Error);
  bad = bank;
  bad.problems[0].ilo_refs.clear();
  CHECK(validate_bank(bad).ok());
  CHECK(has_rule(validate_bank(bad).warnings, "no_ilo_refs"));
}

TEST_CASE("query_problems filters and orders by id") {
  auto bank = make_bank({make_problem("P3", "PID", 10, 0.5, 4, {"I2"}, {"2023-05-01"}),
                         make_problem("P1", "PID", 5, 0.5, 2, {"I1"}),
                         make_problem("F1", "FREQ", 5, 0.5, 3, {"I1"})});
  auto ids = [](const std::vector<Problem>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.id);
    return out;
  };
  CHECK(ids(query_problems(bank, {})) == std::vector<std::string>{"F1", "P1", "P3"});
  ProblemFilter f;
  f.subarea = "PID";
  CHECK(ids(query_problems(bank, f)) == std::vector<std::string>{"P1", "P3"});
  f = {};
  f.unused_since = Date::parse("2023-01-01");
  CHECK(ids(query_problems(bank, f)) == std::vector<std::string>{"F1", "P1"});
  f = {};
  f.ilo = "I1";
  f.min_points = 5;
  f.max_points = 5;
  CHECK(ids(query_problems(bank, f)) == std::vector<std::string>{"F1", "P1"});
  f = {};
  f.solo_level = 4;
  CHECK(ids(query_problems(bank, f)) == std::vector<std::string>{"P3"});
  f = {};
  f.subarea = "NOPE";
  try {
    query_problems(bank, f);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownSubarea);
  }
}

TEST_CASE("record_usage touches exactly the listed problems") {
  auto bank = make_bank({make_problem("P1", "A", 5), make_problem("P2", "A", 5, 0.5, 3, {"I"}, {"2020-01-01"}),
                         make_problem("P3", "A", 5)});
  const auto date = Date::parse("2024-06-01");
  const Bank next = record_usage(bank, {"P1", "P2"}, date);
  CHECK(next.at("P1").usage_dates == std::vector<Date>{date});
  CHECK(next.at("P2").usage_dates.back() == date);
  CHECK(next.at("P2").usage_dates.size() == 2);
  CHECK(next.at("P3") == bank.at("P3"));
  auto p1 = next.at("P1");
  p1.usage_dates = bank.at("P1").usage_dates;
  CHECK(p1 == bank.at("P1"));
  CHECK(bank.at("P1").usage_dates.empty());  // input untouched

  try {
    record_usage(next, {"P1"}, date);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonMonotoneDate);
  }
  CHECK_THROWS_AS(record_usage(bank, {"NOPE"}, date), Error);
}

TEST_CASE("missing fragment names the problem") {
  testing::TempDir dir;
  auto bank = make_bank({make_problem("P1", "A", 5)});
  testing::write_bank_dir(bank, dir.path());
  std::filesystem::remove(dir.path() / "solutions/P1.tex");
  CHECK_THROWS_AS(load_bank(dir.path()), Error);
  ValidationReport issues;
  const Bank loaded = load_bank_collecting(dir.path(), issues);
  CHECK(has_rule(issues.errors, "dangling_fragment"));
  try {
    read_fragment(loaded, loaded.at("P1"), true);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingFragment);
    CHECK(std::string(e.what()).find("P1") != std::string::npos);
  }
}
