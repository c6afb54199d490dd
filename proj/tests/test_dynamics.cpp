#include <doctest.h>

#include <cmath>

#include "rectdim/metric.hpp"
#include "rectdim/odometer.hpp"
#include "rectdim/random.hpp"
#include "rectdim/sampling.hpp"

using namespace rectdim;

namespace {

OdometerPoint bits(std::initializer_list<int> head, std::size_t depth) {
    OdometerPoint x;
    x.bits.assign(depth, 0);
    std::size_t i = 0;
    for (int b : head) x.bits[i++] = static_cast<std::uint8_t>(b);
    return x;
}

}  // namespace

TEST_CASE("measure validation") {
    CHECK_THROWS_WITH_AS(OdometerSystem({0.5, 1.0}), "coordinate measure must lie strictly inside (0,1)",
                         ArgumentError);
    CHECK_THROWS_AS(OdometerSystem({0.0}), ArgumentError);
    CHECK_THROWS_AS(OdometerSystem({}), ArgumentError);
    CHECK_THROWS_AS(ProductSystem({}), ArgumentError);
}

TEST_CASE("sampling") {
    const auto s = OdometerSystem::constant(20, 0.999);
    double ones = 0;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        for (auto b : s.sample(seed).bits) ones += b;
    }
    CHECK(ones / 2000 == doctest::Approx(0.02).epsilon(0.5));
    CHECK(s.sample(42) == s.sample(42));

    const auto fair = OdometerSystem::constant(1, 0.5);
    double zeros = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) zeros += fair.sample(derive_seed(3, seed)).bits[0] == 0;
    CHECK(std::abs(zeros / 10000 - 0.5) < 0.02);
}

TEST_CASE("apply_power examples") {
    const auto s = OdometerSystem::constant(8, 0.25);
    CHECK(s.apply_power(bits({}, 8), 1) == bits({1}, 8));
    CHECK(s.apply_power(bits({1, 1}, 8), 1) == bits({0, 0, 1}, 8));
    CHECK_THROWS_AS(s.apply_power(bits({}, 8), -1), HorizonOverflow);
    CHECK(s.apply_power(bits({1, 0, 1}, 8), 0) == bits({1, 0, 1}, 8));
    CHECK_THROWS_AS(s.apply_power(bits({}, 8), 128), ArgumentError);
    CHECK(s.apply_power(bits({}, 8), 127) == bits({1, 1, 1, 1, 1, 1, 1}, 8));
    CHECK_THROWS_AS(s.apply_power(bits({1, 1, 1, 1, 1, 1, 1, 1}, 8), 1), HorizonOverflow);
}

TEST_CASE("apply_power composes") {
    const auto s = OdometerSystem::constant(64, 0.3);
    Engine rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = s.sample(rng());
        const Index a = uniform_int(rng, -(1 << 20), 1 << 20), b = uniform_int(rng, -(1 << 20), 1 << 20);
        try {
            CHECK(s.apply_power(s.apply_power(x, a), b) == s.apply_power(x, a + b));
        } catch (const HorizonOverflow&) {
        }
    }
}

TEST_CASE("cocycle examples") {
    const auto fair = OdometerSystem::constant(48, 0.5);
    Engine rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = fair.sample(rng());
        CHECK(fair.log_cocycle(x, uniform_int(rng, -1000, 1000)) == 0.0);
    }
    const auto s = OdometerSystem::constant(16, 0.25);
    CHECK(s.log_cocycle(bits({}, 16), 1) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(s.log_cocycle(bits({1}, 16), 1) == doctest::Approx(0.0));
    CHECK(s.log_cocycle(bits({1, 0, 1}, 16), 0) == 0.0);
    // x = 0...0, j = -1 borrows past the horizon.
    CHECK_THROWS_AS(s.log_cocycle(bits({}, 16), -1), HorizonOverflow);
    CHECK(s.log_cocycle(bits({0, 1}, 16), -1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("cocycle identity over Z and Z^d") {
    OdometerSystem s({0.1, 0.2, 0.3, 0.4, 0.45, 0.6, 0.7, 0.8, 0.9, 0.15, 0.25, 0.35, 0.55, 0.65, 0.75, 0.85,
                      0.95, 0.05, 0.5, 0.33, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2,
                      0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2});
    Engine rng(9);
    int checked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto x = s.sample(rng());
        const Index a = uniform_int(rng, -5000, 5000), b = uniform_int(rng, -5000, 5000);
        try {
            const double lhs = s.log_cocycle(x, a + b);
            const double rhs = s.log_cocycle(x, a) + s.log_cocycle(s.apply_power(x, a), b);
            CHECK(std::abs(lhs - rhs) < 1e-12);
            ++checked;
        } catch (const HorizonOverflow&) {
        }
    }
    CHECK(checked > 1500);

    ProductSystem prod({OdometerSystem::constant(32, 0.25), OdometerSystem::constant(24, 0.1),
                        OdometerSystem::constant(40, 0.5)});
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = prod.sample(rng());
        std::vector<std::int64_t> u(3), v(3), w(3);
        for (std::size_t i = 0; i < 3; ++i) {
            u[i] = uniform_int(rng, -300, 300);
            v[i] = uniform_int(rng, -300, 300);
            w[i] = u[i] + v[i];
        }
        try {
            const double lhs = prod.log_cocycle(x, w);
            const double rhs = prod.log_cocycle(x, u) + prod.log_cocycle(prod.apply(x, u), v);
            CHECK(std::abs(lhs - rhs) < 1e-12);
            double parts = 0;
            for (std::size_t i = 0; i < 3; ++i) parts += prod.component(i).log_cocycle(x[i], u[i]);
            CHECK(prod.log_cocycle(x, u) == parts);
        } catch (const HorizonOverflow&) {
        }
    }
    CHECK(prod.log_cocycle(prod.sample(1), std::vector<std::int64_t>{0, 0, 0}) == 0.0);
}

TEST_CASE("product cocycle additivity example") {
    ProductSystem prod({OdometerSystem::constant(8, 0.25), OdometerSystem::constant(8, 0.25)});
    const ProductPoint x{bits({}, 8), bits({1}, 8)};
    CHECK(prod.log_cocycle(x, std::vector<std::int64_t>{1, 1}) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("walker agrees with the cocycle definition") {
    OdometerSystem s({0.25, 0.6, 0.1, 0.45, 0.3, 0.25, 0.7, 0.2, 0.5, 0.4, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25,
                      0.25, 0.25, 0.25, 0.25});
    for (const auto& sys : {s, s.inverse()}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto x = sys.sample(seed);
            for (int dir : {1, -1}) {
                CocycleWalker w(sys, x, dir);
                for (Index j = 1; j <= 300; ++j) {
                    double got = 0;
                    try {
                        got = w.step();
                    } catch (const HorizonOverflow&) {
                        CHECK_THROWS_AS(sys.apply_power(x, dir * j), HorizonOverflow);
                        break;
                    }
                    CHECK(w.bits() == sys.apply_power(x, dir * j).bits);
                    CHECK(std::abs(got - sys.log_cocycle(x, dir * j)) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("inverse odometer") {
    const auto s = OdometerSystem::constant(32, 0.3);
    const auto inv = invert(s);
    CHECK(inv.reversed());
    CHECK_FALSE(invert(inv).reversed());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto x = s.sample(seed);
        for (Index j : {1, 2, 7, 100, -3, -64}) {
            try {
                CHECK(inv.apply_power(x, j) == s.apply_power(x, -j));
                CHECK(inv.apply_power(s.apply_power(x, j), j) == x);
                CHECK(invert(inv).apply_power(x, j) == s.apply_power(x, j));
                CHECK(inv.log_cocycle(x, j) == s.log_cocycle(x, -j));
            } catch (const HorizonOverflow&) {
            }
        }
    }
}

TEST_CASE("entropy") {
    CHECK(binary_entropy(0.25) == doctest::Approx(0.811278124459));
    CHECK(binary_entropy(0.1) == doctest::Approx(0.468995593589));
    CHECK(binary_entropy(0.5) == 1.0);
    const auto s = OdometerSystem::constant(64, 0.25);
    CHECK(s.entropy_average(bits({}, 64), 10) == doctest::Approx(2.0));
    CHECK(OdometerSystem::constant(64, 0.5).entropy_average(s.sample(3), 64) == 1.0);
    double mean = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) mean += s.entropy_average(s.sample(derive_seed(8, seed)), 64);
    CHECK(std::abs(mean / 10000 - binary_entropy(0.25)) < 0.02);
    CHECK_THROWS_AS(s.entropy_average(bits({}, 64), 65), ArgumentError);
}

TEST_CASE("cylinder functions") {
    ProductSystem one({OdometerSystem::constant(8, 0.25)});
    CHECK(CylinderFunction(one, {""}).integral() == 1.0);
    CHECK(CylinderFunction(one, {"0"}).integral() == 0.25);
    CHECK(CylinderFunction(one, {"01"}).integral() == doctest::Approx(0.1875));
    ProductSystem two({OdometerSystem::constant(8, 0.25), OdometerSystem::constant(8, 0.25)});
    const CylinderFunction phi(two, {"0", "1"});
    CHECK(phi.integral() == doctest::Approx(0.1875));
    CHECK(phi({bits({0}, 8), bits({1}, 8)}));
    CHECK_FALSE(phi({bits({1}, 8), bits({1}, 8)}));
    CHECK_THROWS_AS(CylinderFunction(two, {"0"}), ArgumentError);
    CHECK_THROWS_AS(CylinderFunction(one, {"012"}), ArgumentError);
    CHECK_THROWS_AS(CylinderFunction(one, {"000000000"}), ArgumentError);
}

TEST_CASE("change of variables for a cylinder") {
    // E[phi(T^j x) omega_j(x)] = integral of phi.
    const auto s = OdometerSystem::constant(40, 0.25);
    ProductSystem prod({s});
    const CylinderFunction phi(prod, {"01"});
    for (Index j : {1, 3, -2}) {
        double sum = 0, sum2 = 0;
        int n = 0;
        for (std::uint64_t seed = 0; seed < 100000; ++seed) {
            const auto x = s.sample(derive_seed(77, seed));
            double v = 0;
            try {
                const auto y = s.apply_power(x, j);
                if (phi(ProductPoint{y})) v = std::exp(s.log_cocycle(x, j));
            } catch (const HorizonOverflow&) {
            }
            sum += v;
            sum2 += v * v;
            ++n;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sum2 / n - mean * mean) / n);
        CHECK(std::abs(mean - phi.integral()) < 3 * se + 1e-12);
    }
}

TEST_CASE("run_samples is deterministic across workers and redraws on overflow") {
    auto fn = [](std::uint64_t seed) {
        if (seed % 3 == 0) throw HorizonOverflow("x");
        return seed * 2;
    };
    const auto a = run_samples<std::uint64_t>(50, 4, 1, fn);
    const auto b = run_samples<std::uint64_t>(50, 4, 4, fn);
    CHECK(a.results == b.results);
    CHECK(a.seeds == b.seeds);
    CHECK(a.discards == b.discards);
    for (std::size_t i = 0; i < 50; ++i) CHECK(a.results[i] == a.seeds[i] * 2);
    CHECK_THROWS_AS(run_samples<int>(3, 1, 2, [](std::uint64_t) -> int { throw ArgumentError("bad"); }),
                    ArgumentError);
    CHECK_THROWS_AS(run_samples<int>(1, 1, 1, [](std::uint64_t) -> int { throw HorizonOverflow("x"); }, 5),
                    HorizonOverflow);
}
