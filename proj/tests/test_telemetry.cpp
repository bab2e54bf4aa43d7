#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "redreg/errors.hpp"
#include "redreg/jsonio.hpp"
#include "redreg/telemetry.hpp"
#include "testutil.hpp"

using namespace redreg;

namespace {

TelemetryRecord sample_batch() {
  TelemetryRecord r;
  r.kind = TelemetryRecord::Kind::batch;
  r.epoch = 3;
  r.batch = 7;
  r.loss = 1.25;
  r.p = {0.51, 0.26};
  r.sim = 0.4375;
  r.g_norm = {0.125, 2.5};
  r.gate = {1, 0};
  r.d_perp_norm = {0.0625, std::nullopt};
  r.descent_ratio = {1.0, std::nullopt};
  return r;
}

TelemetryRecord sample_epoch() {
  TelemetryRecord r;
  r.kind = TelemetryRecord::Kind::epoch;
  r.epoch = 5;
  r.batch = 25;
  r.loss = 0.75;
  r.pbar = {0.6, 0.3};
  r.growth = {0.01, std::nullopt};
  r.red = {1.5, 0.7};
  r.score = {1.495, std::nullopt};
  r.rlc = {0.9, 1.1};
  r.sim = 0.42;
  r.tau = 0.25;
  r.gate = {0, 0};
  r.dominant = "a";
  r.acc = 0.8;
  r.acc_a = 0.78;
  r.acc_v = 0.44;
  r.f1 = 0.79;
  return r;
}

}  // namespace

TEST_CASE("records serialize with fixed key orders per kind") {
  CHECK(sample_batch().to_line().rfind("{\"kind\":\"batch\",\"epoch\":3,\"batch\":7,\"loss\":1.25,\"p_a\":", 0) == 0);
  CHECK(sample_epoch().to_line().rfind("{\"kind\":\"epoch\",\"epoch\":5,\"batch\":25,", 0) == 0);

  TelemetryRecord run;
  run.kind = TelemetryRecord::Kind::run;
  run.config_json = "{\"method\":\"joint\"}";
  CHECK(run.to_line() == "{\"kind\":\"run\",\"version\":1,\"config\":{\"method\":\"joint\"}}");

  TelemetryRecord abort;
  abort.kind = TelemetryRecord::Kind::abort;
  abort.epoch = 2;
  abort.batch = 9;
  abort.message = "loss blew up";
  CHECK(abort.to_line() ==
        "{\"kind\":\"abort\",\"epoch\":2,\"batch\":9,\"loss\":null,\"message\":\"loss blew up\"}");
}

TEST_CASE("undefined values serialize as null and read back as absent") {
  TelemetryRecord r = sample_batch();
  r.loss.reset();
  r.p = {std::nullopt, std::nullopt};
  const std::string line = r.to_line();
  CHECK(line.find("\"loss\":null") != std::string::npos);
  CHECK(line.find("\"p_a\":null") != std::string::npos);
  const TelemetryRecord back = TelemetryRecord::parse(line);
  CHECK_FALSE(back.loss.has_value());
  CHECK_FALSE(back.p[0].has_value());
  CHECK(back.g_norm[0].has_value());
}

TEST_CASE("write, parse, write is byte-identical for every kind") {
  TelemetryRecord run;
  run.kind = TelemetryRecord::Kind::run;
  run.config_json = "{\"method\":\"redreg\",\"seed\":7}";
  TelemetryRecord abort;
  abort.kind = TelemetryRecord::Kind::abort;
  abort.epoch = 1;
  abort.batch = 2;
  abort.loss = 3.5e6;
  abort.message = "loss 3.5e6 left the stable range";

  for (const TelemetryRecord& r : {run, sample_batch(), sample_epoch(), abort}) {
    const std::string line = r.to_line();
    CHECK(TelemetryRecord::parse(line).to_line() == line);
  }
}

TEST_CASE("awkward doubles survive the round trip") {
  TelemetryRecord r = sample_batch();
  r.loss = 0.1;
  r.p = {1.0 / 3.0, 1e-300};
  r.sim = -0.0;  // folds to plain zero on write
  r.g_norm = {5e17, 123456789.123456789};
  const std::string line = r.to_line();
  CHECK(line.find("\"sim\":0,") != std::string::npos);
  const TelemetryRecord back = TelemetryRecord::parse(line);
  CHECK(*back.loss == 0.1);
  CHECK(*back.p[0] == 1.0 / 3.0);
  CHECK(*back.p[1] == 1e-300);
  CHECK(*back.g_norm[0] == 5e17);
  CHECK(back.to_line() == line);
}

TEST_CASE("parse rejects malformed rows with a reason") {
  CHECK_THROWS_AS(TelemetryRecord::parse("not json"), LoadError);
  CHECK_THROWS_AS(TelemetryRecord::parse("{\"no_kind\":1}"), LoadError);
  CHECK_THROWS_AS(TelemetryRecord::parse("{\"kind\":\"mystery\"}"), LoadError);
  CHECK_THROWS_AS(TelemetryRecord::parse("{\"kind\":\"batch\",\"epoch\":0}"), LoadError);
  CHECK_THROWS_AS(TelemetryRecord::parse(
                      "{\"kind\":\"batch\",\"epoch\":\"zero\",\"batch\":0}"),
                  LoadError);
  CHECK_THROWS_AS(TelemetryRecord::parse("{\"kind\":\"run\"}"), LoadError);
  CHECK_THROWS_AS(TelemetryRecord::parse("{\"kind\":\"abort\",\"epoch\":0,\"batch\":0}"),
                  LoadError);
}

TEST_CASE("telemetry files round-trip through the sink and reader") {
  testutil::TempDir dir("redreg_telemetry_file");
  const std::string path = dir.file("t.jsonl");
  TelemetryRecord run;
  run.kind = TelemetryRecord::Kind::run;
  run.config_json = "{\"method\":\"joint\"}";
  const std::vector<TelemetryRecord> records{run, sample_batch(), sample_epoch()};
  {
    FileTelemetry sink(path);
    for (const auto& r : records) sink.write(r);
  }
  const std::vector<TelemetryRecord> back = read_telemetry(path);
  REQUIRE(back.size() == records.size());
  std::string rewritten;
  for (const auto& r : back) rewritten += r.to_line() + "\n";
  CHECK(rewritten == testutil::slurp(path));
}

TEST_CASE("the reader names the offending line and rejects empty files") {
  testutil::TempDir dir("redreg_telemetry_bad");
  testutil::spit(dir.file("bad.jsonl"), sample_batch().to_line() + "\ngarbage\n");
  try {
    read_telemetry(dir.file("bad.jsonl"));
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  testutil::spit(dir.file("empty.jsonl"), "");
  CHECK_THROWS_AS(read_telemetry(dir.file("empty.jsonl")), LoadError);
  CHECK_THROWS_AS(read_telemetry(dir.file("missing.jsonl")), LoadError);
}

TEST_CASE("format_double folds signed zero and rejects non-finite values") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS_AS(format_double(std::numeric_limits<double>::infinity()), std::exception);
  CHECK_THROWS_AS(format_double(std::nan("")), std::exception);
}
