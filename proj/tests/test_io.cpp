#include <doctest.h>

#include <string>

#include "criteria.hpp"
#include "uaix/config.hpp"
#include "uaix/container.hpp"
#include "uaix/error.hpp"
#include "uaix/heatmap.hpp"
#include "uaix/report.hpp"

using namespace uaix;

namespace {

bool throws_mentioning(const std::vector<std::uint8_t>& bytes, const std::string& needle) {
  try {
    TensorContainer::decode(bytes);
  } catch (const ParseError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("container encodes the documented layout") {
  TensorContainer c;
  c.put("w", Tensor({2}, {1.0f, -2.0f}));
  const auto bytes = c.encode();
  // magic, version, count, then name length, name, dtype, rank, dims, payload.
  REQUIRE(bytes.size() == 4 + 2 + 4 + 4 + 1 + 1 + 4 + 4 + 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "UAIX");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 1);
  CHECK(bytes[14] == 'w');
  CHECK(bytes[15] == 0);
  CHECK(bytes[16] == 1);
  CHECK(bytes[20] == 2);
  // 1.0f little-endian.
  CHECK(bytes[24] == 0x00);
  CHECK(bytes[27] == 0x3f);
  CHECK(TensorContainer::decode(bytes).tensor("w") == c.tensor("w"));
}

TEST_CASE("container decode errors") {
  TensorContainer c;
  c.put("first", Tensor({3}, 1.0f));
  c.put_text("second", "hello");
  const auto bytes = c.encode();
  CHECK(TensorContainer::decode(bytes).text("second") == "hello");

  auto bad = bytes;
  bad[0] = 'X';
  CHECK(throws_mentioning(bad, "magic"));
  bad = bytes;
  bad[4] = 2;
  CHECK(throws_mentioning(bad, "version"));
  bad.assign(bytes.begin(), bytes.end() - 3);
  CHECK(throws_mentioning(bad, "second"));
  bad = bytes;
  bad.push_back(0);
  CHECK(throws_mentioning(bad, "trailing"));

  TensorContainer dup;
  dup.put("a", Tensor({1}, 1.0f));
  CHECK_THROWS_AS(dup.put("a", Tensor({1}, 2.0f)), InvalidArgument);
  auto twice = dup.encode();
  twice[6] = 2;
  const std::vector<std::uint8_t> entry(twice.begin() + 10, twice.end());
  twice.insert(twice.end(), entry.begin(), entry.end());
  CHECK(throws_mentioning(twice, "duplicate"));

  CHECK_THROWS_AS(c.tensor("missing"), ParseError);
  CHECK_THROWS_AS(c.u32("first"), ParseError);
}

TEST_CASE("container value kinds") {
  TensorContainer c;
  const std::vector<std::uint64_t> big{0, 1ull << 40, ~0ull};
  c.put_u64("seeds", big);
  c.put_u32("n", 7);
  c.put_u32("table", {2, 2}, {1, 2, 3, 4});
  const TensorContainer d = TensorContainer::decode(c.encode());
  CHECK(d.u64s("seeds") == big);
  CHECK(d.u32("n") == 7);
  CHECK(d.u32s("table") == std::vector<std::uint32_t>{1, 2, 3, 4});
  CHECK(d.entry("table").dims == Shape{2, 2});
}

TEST_CASE("persistence round trips") {
  const auto r = criteria::round_trips(61);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("seismic colormap") {
  CHECK(seismic(-1.0f) == Rgb{0, 0, 255});
  CHECK(seismic(0.0f) == Rgb{255, 255, 255});
  CHECK(seismic(1.0f) == Rgb{255, 0, 0});
  CHECK(seismic(-0.5f) == Rgb{127, 127, 255});
  CHECK(seismic(0.5f) == Rgb{255, 127, 127});
  CHECK_THROWS_AS(seismic(1.5f), InvalidArgument);
  CHECK_THROWS_AS(seismic(std::nanf("")), InvalidArgument);
}

TEST_CASE("PPM encoding and overlay") {
  const RgbImage img = seismic_image(Tensor({1, 2}, {-1.0f, 1.0f}));
  const auto bytes = encode_ppm(img);
  const std::string header = "P6\n2 1\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(header.size())) == header);
  CHECK(bytes[header.size() + 2] == 255);
  CHECK(bytes[header.size() + 3] == 255);

  const Tensor base({1, 1, 3}, {0.0f, 0.0f, 1.0f});
  const RgbImage o = overlay_image(Tensor({1, 3}, {0.01f, 0.5f, 2.0f}), base, 0.05);
  CHECK(o.at(0, 0) == Rgb{0, 0, 0});
  CHECK(o.at(0, 1) == Rgb{128, 0, 0});
  CHECK(o.at(0, 2) == Rgb{255, 0, 0});
  CHECK_THROWS_AS(overlay_image(Tensor({2, 3}), base, 0.05), ShapeError);

  AggregateMap raw{Tensor({1, 2}, {0.0f, 3.0f}), AggregateKind::Mean, 0.0, Normalization::Raw};
  CHECK_THROWS_AS(export_heatmap(raw, "unused.ppm", HeatmapMode::Seismic), InvalidArgument);
}

TEST_CASE("config parsing") {
  const ConfigFile f = parse_config("# top\n[run]\nseed = 4 # inline\n\n[uai]\nalphas = 10, 90\n");
  CHECK(f.at("run").at("seed") == "4");
  RunConfig c = resolve_config(f, "tiny");
  CHECK(c.seed == 4);
  CHECK(c.alphas == std::vector<double>{10.0, 90.0});
  CHECK(c.train_size == 400);

  CHECK_THROWS_AS(parse_config("[run]\nseed = 1\nseed = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_config("seed = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[run\n"), ParseError);
  CHECK_THROWS_AS(resolve_config(parse_config("[run]\nsed = 1\n")), ParseError);
  CHECK_THROWS_AS(resolve_config(parse_config("[bogus]\n")), ParseError);
  CHECK_THROWS_AS(resolve_config(parse_config("[trainer]\nepochs = -3\n")), ParseError);
  CHECK_THROWS_AS(resolve_config({}, "huge"), InvalidArgument);

  ConfigFile g;
  apply_override(g, "trainer.epochs=3");
  apply_override(g, "run.scale = paper");
  const RunConfig p = resolve_config(g);
  CHECK(p.trainer.epochs == 3);
  CHECK(p.train_size == 20000);
  CHECK_THROWS_AS(apply_override(g, "epochs=3"), ParseError);

  const RunConfig small = resolve_config({});
  CHECK(small.trainer.epochs == 8);
  CHECK(resolve_config(parse_config(dump_config(small))).trainer.epochs == small.trainer.epochs);
  CHECK(dump_config(resolve_config(parse_config(dump_config(small)))) == dump_config(small));
}

TEST_CASE("metric report marks absent rows") {
  MetricReport r;
  r.posterior = "ensemble";
  r.method = "lrp-eps";
  r.images = 3;
  MetricRow base;
  base.name = "Baseline";
  base.available = false;
  MetricRow avg;
  avg.name = "Average";
  avg.available = true;
  avg.auc_summary = {0.75, 0.125, 3, 0};
  avg.ma_summary = {0.5, 0.0, 2, 1};
  r.rows = {base, avg};
  const std::string text = format_metric_report(r);
  CHECK(text.find("ensemble\tlrp-eps\tBaseline\tabsent\tabsent\tabsent\tabsent\tabsent\t3\n") != std::string::npos);
  CHECK(text.find("Average\t0.750000\t0.125000\t0.500000\t0.000000\t1\t3\n") != std::string::npos);
  CHECK(format_number(std::nan("")) == "nan");
}
