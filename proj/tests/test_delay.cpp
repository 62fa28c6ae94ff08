#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sdwan/delay.h"

using namespace sdwan;

namespace {

OverlayLink mk_link(double capacity, double prop) {
  return {"l", "h1", "s1", capacity, prop, LinkKind::Mstp};
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  state = mix(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

}  // namespace

TEST_CASE("predict_delay_spr on the 6 Mbps link") {
  const DelayModelSpec model;
  const OverlayLink link = mk_link(6.0, 10.0);

  // 12000 bits over 3 Mbps of headroom = 4 ms of queueing.
  CHECK(predict_delay_spr(link, 3.0, model) == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(predict_delay_spr(link, 0.0, model) == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(std::isinf(predict_delay_spr(link, 6.0, model)));
  CHECK(std::isinf(predict_delay_spr(link, 7.5, model)));
  CHECK_THROWS_AS(predict_delay_spr(link, -0.1, model), std::invalid_argument);
}

TEST_CASE("predict_delay_qos treats the allocation as a virtual server") {
  const DelayModelSpec model;
  const OverlayLink link = mk_link(12.0, 15.0);

  CHECK(predict_delay_qos(link, 2.0, 4.0, model) == doctest::Approx(21.0).epsilon(1e-12));
  CHECK(predict_delay_qos(link, 0.0, 6.0, model) == doctest::Approx(17.0).epsilon(1e-12));
  CHECK(std::isinf(predict_delay_qos(link, 4.0, 4.0, model)));
  CHECK_THROWS_AS(predict_delay_qos(link, 1.0, 0.001, model), std::invalid_argument);
  CHECK_THROWS_AS(predict_delay_qos(link, -1.0, 4.0, model), std::invalid_argument);
}

TEST_CASE("invert_delay_bound is the algebraic inverse") {
  const DelayModelSpec model;
  const OverlayLink link = mk_link(6.0, 10.0);

  SUBCASE("worked example") {
    const auto load = invert_delay_bound(link, 15.0, model);
    REQUIRE(load.has_value());
    CHECK(*load == doctest::Approx(3.6).epsilon(1e-12));
    CHECK(predict_delay_spr(link, *load, model) == doctest::Approx(15.0).epsilon(1e-12));
  }

  SUBCASE("bound at the propagation delay is infeasible") {
    CHECK(!invert_delay_bound(link, 10.0, model).has_value());
    CHECK(!invert_delay_bound(link, 9.0, model).has_value());
  }

  SUBCASE("huge bounds approach capacity") {
    const auto load = invert_delay_bound(link, 1e9, model);
    REQUIRE(load.has_value());
    CHECK(*load == doctest::Approx(6.0).epsilon(1e-7));
    CHECK(*load < 6.0);
  }

  SUBCASE("tight bounds clamp at zero") {
    // 12 ms bound: 2 ms of slack supports 6 Mbps of drain, zero headroom.
    const auto load = invert_delay_bound(link, 12.0, model);
    REQUIRE(load.has_value());
    CHECK(*load == doctest::Approx(0.0));
  }
}

TEST_CASE("inverse property over random loads") {
  const DelayModelSpec model;
  std::uint64_t rng = 2024;
  for (int i = 0; i < 1000; ++i) {
    const double capacity = 1.0 + 49.0 * uniform01(rng);
    const double prop = 20.0 * uniform01(rng);
    const OverlayLink link = mk_link(capacity, prop);
    const double load = 0.99 * capacity * uniform01(rng);
    const double bound = predict_delay_spr(link, load, model);
    const auto back = invert_delay_bound(link, bound, model);
    REQUIRE(back.has_value());
    CHECK(*back == doctest::Approx(load).epsilon(1e-9));
  }
}

TEST_CASE("monotonicity: increasing in load, decreasing in allocation") {
  const DelayModelSpec model;
  std::uint64_t rng = 7;
  for (int i = 0; i < 1000; ++i) {
    const double capacity = 1.0 + 30.0 * uniform01(rng);
    const OverlayLink link = mk_link(capacity, 10.0 * uniform01(rng));
    const double a = 0.98 * capacity * uniform01(rng);
    const double b = 0.98 * capacity * uniform01(rng);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (hi - lo < 1e-9) continue;
    CHECK(predict_delay_spr(link, lo, model) < predict_delay_spr(link, hi, model));

    const double demand = 0.5 * capacity * uniform01(rng);
    const double alloc_lo = demand + 0.01 + 0.4 * capacity * uniform01(rng);
    const double alloc_hi = alloc_lo + 0.1 + capacity * uniform01(rng);
    CHECK(predict_delay_qos(link, demand, alloc_lo, model) >
          predict_delay_qos(link, demand, alloc_hi, model));
  }
}

TEST_CASE("convexity: second differences are non-negative") {
  const DelayModelSpec model;
  std::uint64_t rng = 99;
  for (int i = 0; i < 1000; ++i) {
    const double capacity = 2.0 + 30.0 * uniform01(rng);
    const OverlayLink link = mk_link(capacity, 5.0);
    const double h = 1e-4;

    const double load = (0.9 * capacity - 2 * h) * uniform01(rng) + h;
    const double f0 = predict_delay_spr(link, load - h, model);
    const double f1 = predict_delay_spr(link, load, model);
    const double f2 = predict_delay_spr(link, load + h, model);
    CHECK(f0 + f2 - 2.0 * f1 >= -1e-9);

    const double demand = 0.3 * capacity * uniform01(rng);
    const double alloc = demand + 0.05 + 0.6 * capacity * uniform01(rng);
    const double g0 = predict_delay_qos(link, demand, alloc - h, model);
    const double g1 = predict_delay_qos(link, demand, alloc, model);
    const double g2 = predict_delay_qos(link, demand, alloc + h, model);
    CHECK(g0 + g2 - 2.0 * g1 >= -1e-9);
  }
}
