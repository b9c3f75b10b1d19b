#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "soficlen/job.hpp"

using namespace soficlen;

namespace {

JobSpec job_from(const std::string& text, const std::string& name = "job.ini") {
  std::istringstream in(text);
  return parse_job(in, name, JOBS_DIR);
}

std::string error_of(const std::string& text) {
  try {
    job_from(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kCirculant = R"(quantity = vrk-fp
group = Z
[sofic]
schedule = 100,1000
[matrix]
size = 1 1
entry = 0 0 1@1 -1
)";

}  // namespace

TEST_CASE("config grammar") {
  std::istringstream in("# c\nkey = a = b\n[s]\n x =  y \nx = z\n");
  const auto cfg = Config::parse(in, "f");
  REQUIRE(cfg.sections.size() == 2);
  CHECK(cfg.sections[0].find("key")->value == "a = b");
  CHECK(cfg.section("s")->all("x").size() == 2);
  CHECK(cfg.section("s")->find("x")->line == 5);
  std::istringstream bad("[s\n");
  CHECK_THROWS_WITH_AS(Config::parse(bad, "f"), "f:1: unterminated section header", ConfigError);
  std::istringstream novalue("[s]\njust words\n");
  CHECK_THROWS_WITH_AS(Config::parse(novalue, "f"), "f:2: expected `key = value`", ConfigError);
}

TEST_CASE("job errors carry positions") {
  CHECK(error_of("group = Z\n") == "job.ini:0: missing key `quantity`");
  CHECK(error_of("quantity = nope\ngroup = Z\n").rfind("job.ini:1: unknown quantity `nope`", 0) == 0);
  CHECK(error_of(std::string(kCirculant) + "colour = red\n") == "job.ini:8: unknown key `colour` in [matrix]");
  CHECK(error_of("quantity = vrk-fp\ngroup = Z\n[matrix]\nsize = 1 1\n") == "job.ini:1: missing section [sofic]");
  CHECK(error_of("quantity = vrk-fp\ngroup = Z\n[sofic]\nschedule = 10,5\n[matrix]\nsize = 1 1\n")
            .rfind("job.ini:4:", 0) == 0);
  CHECK(error_of("quantity = vrk-fp\ngroup = F2\n[sofic]\nmodel = cyclic\nschedule = 10\n[matrix]\nsize = 1 1\n")
            .rfind("job.ini:4: sofic model `cyclic` does not fit group F2", 0) == 0);
  CHECK(error_of("quantity = vrk-fp\ngroup = Z\n[sofic]\nschedule = 10\n[matrix]\nsize = 1 1\nentry = 0 3 1\n")
            .rfind("job.ini:7: entry index", 0) == 0);
  CHECK(error_of("quantity = vrk-fp\ngroup = Z\n[sofic]\nschedule = 10\n[matrix]\nsize = 1 1\nentry = 0 0 1@s1\n")
            .rfind("job.ini:7:", 0) == 0);
  CHECK(error_of("quantity = mrk-relative\ngroup = Z\n[pair]\na = 1 ; 1\nb = 1\n[sofic]\nschedule = 10\n")
            .find("ambient rank is 2") != std::string::npos);
}

TEST_CASE("circulant vrk job") {
  const auto job = job_from(kCirculant);
  const auto out = run_job(job);
  CHECK(out.exit_code == 0);
  const auto j = nlohmann::json::parse(out.json);
  CHECK(j["quantity"] == "vrk");
  CHECK(j["headline"] == 0.001);
  CHECK(j["series"].size() == 2);
  CHECK(j["series"][1]["value_num"] == 1);
  CHECK(j["series"][1]["value_den"] == 1000);
  CHECK(j["snapped"] == "0");
  CHECK(j.contains("defect_summary"));
  // Byte-identical reruns, including with more workers.
  CHECK(run_job(job).json == out.json);
  CHECK(run_job(job, {.jobs = 2}).json == out.json);
}

TEST_CASE("csv rows match the schedule") {
  const auto job = job_from(R"(quantity = mrk-fp
group = F2
[sofic]
schedule = 20,40,80
seeds = 1..4
[matrix]
size = 1 1
entry = 0 0 1@s1 -1
)");
  const auto out = run_job(job);
  std::size_t lines = 0;
  for (char c : out.csv) lines += c == '\n';
  CHECK(lines == 1 + 3 * 4);
}

TEST_CASE("prime-field vrk is refused") {
  const auto job = job_from("quantity = vrk-fp\ngroup = Z\nring = GF(5)\n[sofic]\nschedule = 10\n[matrix]\nsize = 1 1\n"
                            "entry = 0 0 1@1 -1\n");
  try {
    run_job(job);
    FAIL("expected a refusal");
  } catch (const UnsupportedError& e) {
    CHECK(std::string(e.what()).find("mean rank") != std::string::npos);
  }
}

TEST_CASE("bundled job files") {
  for (const char* name : {"circulant_vrk.ini", "free_defect.ini", "folner_compare.ini", "c2_finite.ini",
                           "unit_direct_finite.ini"}) {
    CAPTURE(name);
    const auto job = load_job(std::filesystem::path(JOBS_DIR) / name);
    const auto out = run_job(job);
    CHECK(out.exit_code == 0);
    CHECK(nlohmann::json::parse(out.json)["job"] == quantity_name(job.quantity));
  }
  const auto cmp = nlohmann::json::parse(run_job(load_job(std::filesystem::path(JOBS_DIR) / "folner_compare.ini")).json);
  CHECK(cmp["oracle"]["residual"].get<double>() <= 0.02);
  CHECK(cmp["oracle"]["value_exact"] == "1");
}

TEST_CASE("failed comparisons exit with 2") {
  const auto job = job_from(R"(quantity = oracle-compare
group = Z
[oracle]
kind = folner
tolerance = 0.000001
[pair]
a = 1@1 -1
[folner]
boxes = 20
[sofic]
schedule = 50
)");
  CHECK(run_job(job).exit_code == 2);
}

TEST_CASE("other quantities") {
  const auto laurent = run_job(job_from("quantity = laurent-oracle\ngroup = Z^2\n[matrix]\nsize = 1 2\n"
                                        "entry = 0 0 1@1,0 -1\nentry = 0 1 1@0,1 -1\n"));
  const auto lj = nlohmann::json::parse(laurent.json);
  CHECK(lj["rank"] == 1);
  CHECK(lj["vrk"] == 1);

  const auto folner = run_job(job_from("quantity = folner\ngroup = Z\n[pair]\na = 2\n[folner]\nboxes = 10\n"));
  CHECK(nlohmann::json::parse(folner.json)["value_exact"] == "1");

  const auto add = run_job(job_from("quantity = addition-check\ngroup = Z\n[sofic]\nschedule = 50,200\n"
                                    "[matrix]\nsize = 1 1\nentry = 0 0 1@1 -1\n"));
  CHECK(add.exit_code == 0);
  CHECK(nlohmann::json::parse(add.json)["max_residual_routes"] == "0");

  const auto rel = run_job(job_from("quantity = mrk-relative\ngroup = Z^2\n[pair]\na = 1@1,0 -1\nf_radius = 1\n"
                                    "[sofic]\ndims = 8x8,16x16\n"));
  CHECK(nlohmann::json::parse(rel.json)["headline_exact"] == "15/16");

  const auto not_inverse = run_job(job_from("quantity = direct-finite\ngroup = Z\n[matrix]\nsize = 1 1\nentry = 0 0 2\n"
                                            "[inverse]\nsize = 1 1\nentry = 0 0 1\n"));
  CHECK(nlohmann::json::parse(not_inverse.json)["verdict"] == "NotLeftInverse");
}
