#include <doctest.h>

#include <cmath>
#include <random>

#include "lambdasim/process_space.hpp"

using namespace lambdasim;

namespace {

// The driven two-level emitter with process-states 0 (no photon yet) and 1
// (at least one photon emitted): S = {g0, e0, g1, e1}, J1 = |g1><e0| as the
// 0 -> 1 event and the same emission as a residual within 1.
ExtendedSystem two_level_system(double drive, double gamma, bool aggregate_emitted) {
    ComplexMatrix h = ComplexMatrix::Zero(2, 2);
    h(0, 1) = h(1, 0) = drive;
    ComplexMatrix jump = ComplexMatrix::Zero(2, 2);
    jump(0, 1) = 1.0;

    ProcessGraph graph(2);
    const int fresh = graph.add_label("0");
    const int emitted = graph.add_label("1", aggregate_emitted);
    graph.add_event(fresh, emitted, jump, gamma, EventClass::Spontaneous);
    if (!aggregate_emitted) {
        graph.add_residual(jump, gamma, EventClass::Spontaneous, {emitted});
    }

    ComplexVector ket = ComplexVector::Zero(2);
    ket[1] = 1.0;
    return extend_with_process_states(h, graph, fresh, ket);
}

std::vector<std::pair<double, double>> emission_curve(const ExtendedSystem& system,
                                                      double t_max) {
    OdeControl control;
    control.t_max = t_max;
    control.termination_threshold = 0.0;
    BlockDensityMatrix rho = system.initial;
    std::vector<std::pair<double, double>> curve;
    propagate(rho, system.generator, control, [&](double t, const ComplexVector& flat) {
        curve.emplace_back(t, system.generator.block_population(flat, 1));
    });
    return curve;
}

}  // namespace

TEST_CASE("two-level example: basis and terms match the worked construction") {
    ExtendedSystem system = two_level_system(0.3, 0.1, false);
    const auto& gen = system.generator;
    REQUIRE(gen.layout()->block_count() == 2);
    CHECK(gen.layout()->dims[0] == 2);
    CHECK(gen.layout()->dims[1] == 2);  // {g1, e1}
    CHECK(gen.layout()->total == 8);
    REQUIRE(gen.terms().size() == 2);  // the 0->1 event plus the residual on 1
    CHECK(gen.terms()[0].source == 0);
    CHECK(gen.terms()[0].target == 1);
    CHECK_FALSE(gen.terms()[0].aggregate_target);
    CHECK(gen.terms()[1].source == 1);
    CHECK(gen.terms()[1].target == 1);
}

TEST_CASE("two-level example: undriven start in |e> emits as 1 - exp(-Gamma t)") {
    const double gamma = 0.25;
    ExtendedSystem system = two_level_system(0.0, gamma, false);
    // with no drive the e1 state is never populated: the block basis is pruned
    CHECK(system.generator.layout()->dims[1] == 1);

    const auto curve = emission_curve(system, 5.0 / gamma);
    for (const auto& [t, emitted] : curve) {
        CHECK(std::abs(emitted - (1.0 - std::exp(-gamma * t))) <= 1e-8);
    }
}

TEST_CASE("two-level example: aggregate label reproduces the emission distribution") {
    const double drive = 0.4, gamma = 0.15;
    ExtendedSystem full = two_level_system(drive, gamma, false);
    ExtendedSystem reduced = two_level_system(drive, gamma, true);
    CHECK(reduced.generator.layout()->total < full.generator.layout()->total);

    OdeControl control;
    control.t_max = 40.0;
    control.termination_threshold = 0.0;
    for (double t : {2.0, 10.0, 40.0}) {
        OdeControl c = control;
        c.t_max = t;
        BlockDensityMatrix rho_full = full.initial;
        BlockDensityMatrix rho_red = reduced.initial;
        propagate(rho_full, full.generator, c);
        propagate(rho_red, reduced.generator, c);
        const double p_full = full.generator.block_population(rho_full.flat(), 1);
        const double p_red = reduced.generator.block_population(rho_red.flat(), 1);
        CHECK(p_full == doctest::Approx(p_red).epsilon(1e-9));
    }
}

TEST_CASE("cyclic jump graphs are rejected") {
    ComplexMatrix op = ComplexMatrix::Identity(2, 2);
    ProcessGraph graph(2);
    const int a = graph.add_label("a");
    const int b = graph.add_label("b");
    graph.add_event(a, b, op, 1.0);
    graph.add_event(b, a, op, 1.0);
    ComplexVector ket = ComplexVector::Zero(2);
    ket[0] = 1.0;
    CHECK_THROWS_AS(
        extend_with_process_states(ComplexMatrix::Zero(2, 2), graph, a, ket),
        std::invalid_argument);
    CHECK_THROWS_AS(graph.add_event(a, a, op, 1.0), std::invalid_argument);
}

TEST_CASE("malformed graphs are rejected up front") {
    ComplexMatrix op = ComplexMatrix::Identity(2, 2);
    ProcessGraph graph(2);
    const int a = graph.add_label("a");
    const int sink = graph.add_label("sink", true);
    CHECK_THROWS_AS(graph.add_event(sink, a, op, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(graph.add_event(a, 5, op, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(graph.add_event(a, sink, op, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(graph.add_event(a, sink, ComplexMatrix::Identity(3, 3), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(graph.add_seed_states(a, {7}), std::invalid_argument);
}

TEST_CASE("aggregate gain equals the population flux, not an interference term") {
    // Two source states decay into two distinct destinations collapsed into one
    // aggregate. A coherent superposition source must transfer population at
    // the sum of the individual fluxes; cross terms would be unphysical.
    ComplexMatrix jump = ComplexMatrix::Zero(4, 4);
    jump(2, 0) = 1.0;  // a -> x
    jump(3, 1) = 1.0;  // b -> y
    ProcessGraph graph(4);
    const int src = graph.add_label("src");
    const int sink = graph.add_label("sink", true);
    const double rate = 0.3;
    graph.add_event(src, sink, jump, rate);
    ComplexVector ket = ComplexVector::Zero(4);
    ket[0] = 1.0 / std::sqrt(2.0);
    ket[1] = 1.0 / std::sqrt(2.0);
    ExtendedSystem system =
        extend_with_process_states(ComplexMatrix::Zero(4, 4), graph, src, ket);
    REQUIRE(system.generator.terms().size() == 1);
    CHECK(system.generator.terms()[0].op.rows() == 2);  // two virtual rows kept

    ComplexVector drho(system.generator.layout()->total);
    system.generator.apply(system.initial.flat(), drho);
    const double gain = drho[system.generator.layout()->offsets[sink]].real();
    CHECK(gain == doctest::Approx(rate).epsilon(1e-14));  // rate * (1/2 + 1/2)
}

TEST_CASE("sparse and structured generator paths agree entrywise") {
    ExtendedSystem system = two_level_system(0.7, 0.2, false);
    const auto& gen = system.generator;
    ComplexVector rho = ComplexVector::Zero(gen.layout()->total);
    // a random Hermitian block state
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int b = 0; b < gen.layout()->block_count(); ++b) {
        const int d = gen.layout()->dims[b];
        ComplexMatrix m(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) m(i, j) = Complex(normal(rng), normal(rng));
        }
        m = (m * m.adjoint()).eval();
        Eigen::Map<ComplexMatrix>(rho.data() + gen.layout()->offsets[b], d, d) = m;
    }
    ComplexVector fast(rho.size()), reference(rho.size());
    gen.apply(rho, fast);
    gen.apply_terms(rho, reference);
    CHECK((fast - reference).cwiseAbs().maxCoeff() <= 1e-13);
}
