#include <cmath>
#include <random>

#include "doctest.h"
#include "fractree/checks.hpp"
#include "fractree/error.hpp"
#include "oracles.hpp"

using namespace fractree;

namespace {

Layer layer_of(std::vector<Disk> cuts) {
  Layer l;
  for (std::size_t i = 0; i < cuts.size(); ++i) cuts[i].vertex = static_cast<int>(i);
  l.cuts = std::move(cuts);
  return l;
}

DiskSet design(double p, int depth, double r) {
  ParamSet prm;
  prm.p = p;
  prm.depth = depth;
  prm.r = r;
  return assign_radii(build_embedding(prm));
}

}  // namespace

TEST_CASE("material validation") {
  MaterialSpec m;
  CHECK_NOTHROW(m.validate());
  m.kerf_mm = 2.0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = {};
  m.min_bridge_mm = 0;
  CHECK_THROWS_AS(m.validate(), DomainError);
  m = {};
  m.bed_diameter_mm = -1;
  CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("skeleton rebuilds the tree edges") {
  ParamSet prm;
  prm.depth = 4;
  const auto emb = build_embedding(prm);
  const auto sk = skeleton(assign_radii(emb));
  REQUIRE(sk.edges.size() == emb.edges.size());
  for (std::size_t i = 0; i < sk.vertices.size(); ++i) {
    CHECK(sk.vertices[i].position == emb.vertices[i].position);
    CHECK(sk.vertices[i].parent == emb.vertices[i].parent);
  }
}

TEST_CASE("embedding check") {
  const auto ok = check_embedding(design(0.61, 6, 0.9), 0.02);
  CHECK(ok.pass);
  CHECK(ok.crossings.empty());
  CHECK(ok.clearance.gap >= 0.02);

  const auto fat = check_embedding(design(0.61, 6, 1.2), 0.02);
  CHECK_FALSE(fat.pass);
  CHECK(fat.clearance.gap < 0.02);

  const auto crossing = check_embedding(design(0.95, 8, 0.01), 0.0, {false, true});
  CHECK_FALSE(crossing.pass);
  CHECK_FALSE(crossing.crossings.empty());

  CHECK(check_embedding(design(0.95, 8, 0.01), 0.0, {false, false}).pass);
  CHECK_THROWS_AS(check_embedding(design(0.61, 3, 0.9), -1.0), DomainError);
}

TEST_CASE("pair neck between two disks") {
  const auto layer = layer_of({{{-1.0, 0.0}, 0.5, 0, 0}, {{1.0, 0.0}, 0.8, 0, 0}});
  const auto pairs = pair_bridges(layer, 3.0);
  REQUIRE(pairs.size() == 1u);
  CHECK(pairs[0].width == doctest::Approx(0.7));
  CHECK(pairs[0].witness.x == doctest::Approx(-0.15));
  CHECK(pairs[0].witness.y == doctest::Approx(0.0));
  const auto rep = min_bridge_width(layer, 3.0);
  CHECK(rep.kind == BridgeKind::Pair);
  CHECK(rep.width == doctest::Approx(0.7));
  CHECK_FALSE(rep.merged);
  CHECK_FALSE(rep.touches_rim);
}

TEST_CASE("a third disk in the corridor removes the neck") {
  const auto layer = layer_of({{{-1.0, 0.0}, 0.5, 0, 0}, {{1.0, 0.0}, 0.5, 0, 0}, {{0.0, 0.3}, 0.2, 0, 0}});
  for (const auto& b : pair_bridges(layer, 3.0)) CHECK_FALSE((b.disk_a == 0 && b.disk_b == 1));
}

TEST_CASE("rim necks") {
  const auto centred = layer_of({{{0, 0}, 2.0, 0, 0}});
  const auto rim = rim_bridge(centred, 3.0);
  CHECK(rim.kind == BridgeKind::Rim);
  CHECK(rim.width == doctest::Approx(1.0));
  CHECK(rim.witness.x == doctest::Approx(0.0));
  CHECK(rim.witness.y == doctest::Approx(2.5));

  const auto offset = layer_of({{{1.0, 0}, 1.0, 0, 0}});
  const auto r2 = rim_bridge(offset, 3.0);
  CHECK(r2.width == doctest::Approx(1.0));
  CHECK(r2.witness.x == doctest::Approx(2.5));

  const auto rep = min_bridge_width(centred, 3.0);
  CHECK(rep.kind == BridgeKind::Rim);
  CHECK(rep.width == doctest::Approx(1.0));
}

TEST_CASE("no neck at all is reported as merged") {
  const auto touching = layer_of({{{2.5, 0}, 1.0, 0, 0}});
  const auto rep = min_bridge_width(touching, 3.0);
  CHECK(rep.merged);
  CHECK(rep.width == 0.0);
  CHECK(rep.touches_rim);
  CHECK_THROWS_AS(min_bridge_width(Layer{}, 3.0), EmptyInputError);
}

TEST_CASE("neck width against a raster estimate") {
  std::mt19937_64 rng(19);
  const double R = 3.0;
  const int size = 1024;
  const double cell = 2 * R / (size - 8);
  for (int t = 0; t < 3; ++t) {
    const auto cuts = oracle::random_layer(rng, R, 12, 3 * cell);
    const auto rep = min_bridge_width(layer_of(cuts), R);
    const auto est = oracle::raster_bridge(cuts, R, size);
    if (rep.merged) {
      CHECK_FALSE(std::isfinite(est.width));
    } else {
      CHECK(std::abs(est.width - rep.width) <= std::max(0.05 * rep.width, 2 * est.cell));
    }
  }
}

TEST_CASE("validation report") {
  const auto disks = design(0.61, 4, 0.9);
  StackOptions opt;
  const auto stack = build_stack(disks, opt);
  MaterialSpec m;
  m.scale_mm_per_unit = 50;
  const auto rep = validate(stack, disks, m, 0.02);
  CHECK(rep.pass);
  CHECK(rep.messages.empty());
  REQUIRE(rep.layers.size() == 5u);
  CHECK(rep.fit.extent_ok);
  CHECK(rep.fit.max_extent_mm == doctest::Approx(300.0));
  for (const auto& lc : rep.layers) CHECK(lc.bridge_mm == doctest::Approx(lc.bridge.width * 50));

  const auto fit = check_fit(stack, m);
  CHECK(fit.pass);
  CHECK(fit.thinnest_layer == rep.fit.thinnest_layer);
  CHECK(fit.thinnest_bridge_mm == doctest::Approx(rep.fit.thinnest_bridge_mm));

  MaterialSpec strict = m;
  strict.min_bridge_mm = rep.fit.thinnest_bridge_mm + 0.5;
  const auto fail = validate(stack, disks, strict, 0.02);
  CHECK_FALSE(fail.pass);
  REQUIRE_FALSE(fail.messages.empty());
  const std::string layer_tag = "layer " + std::to_string(rep.fit.thinnest_layer);
  bool named = false;
  for (const auto& msg : fail.messages) named = named || msg.rfind(layer_tag, 0) == 0;
  CHECK(named);

  MaterialSpec small_bed = m;
  small_bed.bed_diameter_mm = 200;
  const auto bed = validate(stack, disks, small_bed, 0.02);
  CHECK_FALSE(bed.pass);
  CHECK_FALSE(bed.fit.extent_ok);
}

TEST_CASE("vertices off the plate fail validation") {
  const auto disks = design(0.95, 7, 0.05);
  StackOptions opt;
  opt.scheme = Scheme::Growth;
  const auto stack = build_stack(disks, opt);
  const auto rep = validate(stack, disks, MaterialSpec{}, 0.0);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.outside_plate.empty());
}
