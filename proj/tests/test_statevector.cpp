// Copyright 2026 The qklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <bit>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "qklab/errors.hpp"
#include "qklab/statevector.hpp"

using namespace qklab;
using oracles::CMatrix;
using oracles::CVector;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

StateVector random_state(int n_qubits, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Complex> amps(std::size_t{1} << n_qubits);
    double norm_sq = 0.0;
    for (auto& a : amps) {
        a = Complex(rng.normal(), rng.normal());
        norm_sq += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(norm_sq);
    return StateVector(n_qubits, std::move(amps));
}

} // namespace

TEST_CASE("zero_state places amplitude 1 at index 0") {
    const auto s = StateVector::zero_state(1);
    CHECK(s.n_qubits() == 1);
    CHECK(s.dim() == 2);
    CHECK(s.amplitude(0) == Complex(1.0, 0.0));
    CHECK(s.amplitude(1) == Complex(0.0, 0.0));

    const auto s3 = StateVector::zero_state(3);
    CHECK(s3.dim() == 8);
    CHECK(s3.amplitude(0) == Complex(1.0, 0.0));
    for (std::size_t k = 1; k < 8; ++k)
        CHECK(s3.amplitude(k) == Complex(0.0, 0.0));
    CHECK(s3.is_normalized());
}

TEST_CASE("qubit capacity is enforced") {
    CHECK_THROWS_AS(StateVector::zero_state(0), InputError);
    CHECK_THROWS_AS(StateVector::zero_state(27), CapacityError);
    CHECK_NOTHROW(StateVector::zero_state(27, 28));
    CHECK_THROWS_AS(StateVector(2, std::vector<Complex>(3)), InputError);
}

TEST_CASE("product_state matches an explicit Kronecker expansion") {
    // factor j becomes qubit j = bit j, so amplitude(b) is the product of
    // per-factor amplitudes selected by the bits of b.
    const std::vector<SingleQubitState> factors = {
        {Complex(0.6, 0.0), Complex(0.0, 0.8)},
        {Complex(kInvSqrt2, 0.0), Complex(-kInvSqrt2, 0.0)},
        {Complex(0.0, 1.0), Complex(0.0, 0.0)},
    };
    const auto s = StateVector::product_state(factors);
    REQUIRE(s.dim() == 8);
    for (std::size_t b = 0; b < 8; ++b) {
        Complex expect(1.0, 0.0);
        for (int q = 0; q < 3; ++q) {
            const auto& f = factors[static_cast<std::size_t>(q)];
            expect *= ((b >> q) & 1u) ? f.a1 : f.a0;
        }
        CHECK(std::abs(s.amplitude(b) - expect) < 1e-15);
    }
}

TEST_CASE("hadamard_all on |0> and involution") {
    const auto s = apply_hadamard_all(StateVector::zero_state(1));
    CHECK(s.amplitude(0).real() == doctest::Approx(kInvSqrt2).epsilon(1e-12));
    CHECK(s.amplitude(1).real() == doctest::Approx(kInvSqrt2).epsilon(1e-12));

    const auto r = random_state(5, 21);
    const auto twice = apply_hadamard_all(apply_hadamard_all(r));
    for (std::size_t k = 0; k < r.dim(); ++k)
        CHECK(std::abs(twice.amplitude(k) - r.amplitude(k)) < 1e-12);
}

TEST_CASE("hadamard_all equals the dense Walsh matrix") {
    const auto r = random_state(4, 22);
    const auto got = apply_hadamard_all(r);
    // Dense H^(x)4 entrywise via the parity rule.
    const std::size_t dim = 16;
    for (std::size_t row = 0; row < dim; ++row) {
        Complex expect(0.0, 0.0);
        for (std::size_t col = 0; col < dim; ++col) {
            const int par = std::popcount(row & col) % 2;
            expect += (par == 0 ? 0.25 : -0.25) * r.amplitude(col);
        }
        CHECK(std::abs(got.amplitude(row) - expect) < 1e-12);
    }
}

TEST_CASE("diagonal phases match exp(i*theta*Z) on one qubit") {
    // phase(b) = +theta for bit 0 clear, -theta for bit 0 set reproduces
    // the diagonal unitary exp(i*theta*Z).
    const double theta = 0.731;
    const auto plus = apply_hadamard_all(StateVector::zero_state(1));
    const auto rotated = apply_diagonal_phases(plus, [&](std::size_t b) {
        return (b & 1u) ? -theta : theta;
    });
    const Complex e_plus = std::exp(Complex(0.0, theta)) * kInvSqrt2;
    const Complex e_minus = std::exp(Complex(0.0, -theta)) * kInvSqrt2;
    CHECK(std::abs(rotated.amplitude(0) - e_plus) < 1e-12);
    CHECK(std::abs(rotated.amplitude(1) - e_minus) < 1e-12);
}

TEST_CASE("diagonal phases reject non-finite phase values") {
    const auto s = StateVector::zero_state(2);
    CHECK_THROWS_AS(
        apply_diagonal_phases(
            s, [](std::size_t) { return std::nan(""); }),
        InputError);
}

TEST_CASE("diagonal phases preserve moduli and zero phase is identity") {
    const auto r = random_state(4, 23);
    const auto same =
        apply_diagonal_phases(r, [](std::size_t) { return 0.0; });
    for (std::size_t k = 0; k < r.dim(); ++k)
        CHECK(std::abs(same.amplitude(k) - r.amplitude(k)) < 1e-15);

    const auto turned =
        apply_diagonal_phases(r, [](std::size_t b) { return 0.1 * b; });
    for (std::size_t k = 0; k < r.dim(); ++k)
        CHECK(std::abs(std::abs(turned.amplitude(k)) -
                       std::abs(r.amplitude(k))) < 1e-12);
}

TEST_CASE("two-qubit gate equals the dense embedded matrix") {
    Rng rng(31);
    TwoQubitUnitary gate;
    CMatrix dense(4, 4);
    // A random unitary via Gram-Schmidt on a random complex matrix.
    CMatrix raw(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            raw(i, j) = Complex(rng.normal(), rng.normal());
    const Eigen::HouseholderQR<CMatrix> qr(raw);
    dense = qr.householderQ() * CMatrix::Identity(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            gate(i, j) = dense(i, j);
    REQUIRE(gate.is_unitary());

    const auto r = random_state(3, 33);
    for (const auto [qa, qb] :
         std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {0, 2}, {2, 0}}) {
        const auto got = apply_two_qubit_gate(r, gate, qa, qb);
        const CMatrix big = oracles::embed_two_qubit_gate(3, dense, qa, qb);
        CVector in(8);
        for (std::size_t k = 0; k < 8; ++k)
            in(static_cast<Eigen::Index>(k)) = r.amplitude(k);
        const CVector expect = big * in;
        for (std::size_t k = 0; k < 8; ++k)
            CHECK(std::abs(got.amplitude(k) -
                           expect(static_cast<Eigen::Index>(k))) < 1e-12);
        CHECK(got.is_normalized(1e-10));
    }
}

TEST_CASE("SWAP exchanges qubits of a product state") {
    TwoQubitUnitary swap;
    swap(0, 0) = 1.0;
    swap(1, 2) = 1.0;
    swap(2, 1) = 1.0;
    swap(3, 3) = 1.0;

    const std::vector<SingleQubitState> factors = {
        {Complex(1.0, 0.0), Complex(0.0, 0.0)},  // |0>
        {Complex(0.0, 0.0), Complex(1.0, 0.0)},  // |1>
    };
    const auto s01 = StateVector::product_state(factors);
    const auto swapped = apply_two_qubit_gate(s01, swap, 0, 1);
    // |0>|1> = basis index 2 (bit 1 set); after SWAP, basis index 1.
    CHECK(std::abs(swapped.amplitude(1) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(swapped.amplitude(2)) < 1e-15);
}

TEST_CASE("gate on swapped qubit order uses swapped_qubits") {
    Rng rng(47);
    TwoQubitUnitary gate;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            gate(i, j) = Complex(rng.normal(), rng.normal());

    const auto r = random_state(4, 48);
    const auto a = apply_two_qubit_gate(r, gate, 1, 3);
    const auto b = apply_two_qubit_gate(r, gate.swapped_qubits(), 3, 1);
    for (std::size_t k = 0; k < r.dim(); ++k)
        CHECK(std::abs(a.amplitude(k) - b.amplitude(k)) < 1e-12);
}

TEST_CASE("two-qubit gate index validation") {
    const auto s = StateVector::zero_state(3);
    const auto id = TwoQubitUnitary::identity();
    CHECK_THROWS_AS(apply_two_qubit_gate(s, id, 1, 1), IndexError);
    CHECK_THROWS_AS(apply_two_qubit_gate(s, id, 0, 3), IndexError);
    CHECK_THROWS_AS(apply_two_qubit_gate(s, id, -1, 2), IndexError);
}

TEST_CASE("gate application is linear") {
    const auto id = TwoQubitUnitary::identity();
    TwoQubitUnitary gate = id;
    gate(1, 1) = Complex(0.0, 1.0);
    gate(2, 2) = Complex(0.0, -1.0);

    const auto u = random_state(3, 51);
    const auto v = random_state(3, 52);
    std::vector<Complex> mix(u.dim());
    const Complex ca(0.3, -0.2), cb(0.5, 0.7);
    for (std::size_t k = 0; k < u.dim(); ++k)
        mix[k] = ca * u.amplitude(k) + cb * v.amplitude(k);
    const StateVector w(3, std::move(mix));

    const auto gw = apply_two_qubit_gate(w, gate, 0, 2);
    const auto gu = apply_two_qubit_gate(u, gate, 0, 2);
    const auto gv = apply_two_qubit_gate(v, gate, 0, 2);
    for (std::size_t k = 0; k < w.dim(); ++k)
        CHECK(std::abs(gw.amplitude(k) -
                       (ca * gu.amplitude(k) + cb * gv.amplitude(k))) < 1e-10);
}

TEST_CASE("inner product against extended-precision accumulation") {
    const auto a = random_state(6, 61);
    const auto b = random_state(6, 62);
    const auto got = inner_product(a, b);
    const auto expect = oracles::inner_product_ld(a.amplitudes(), b.amplitudes());
    CHECK(std::abs(got - expect) < 1e-13);

    CHECK(std::abs(inner_product(a, a) - Complex(1.0, 0.0)) < 1e-12);
    CHECK_THROWS_AS(inner_product(a, StateVector::zero_state(3)), InputError);
}

TEST_CASE("fidelity is the squared overlap, symmetric, in [0,1]") {
    const auto a = random_state(5, 71);
    const auto b = random_state(5, 72);
    const double f = fidelity(a, b);
    CHECK(f == doctest::Approx(std::norm(inner_product(a, b))).epsilon(1e-12));
    CHECK(f == doctest::Approx(fidelity(b, a)).epsilon(1e-12));
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Haar samples are normalized and unbiased") {
    Rng rng(81);
    double sum_p0 = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto s = sample_haar_single_qubit(rng);
        CHECK(std::abs(s.norm_sq() - 1.0) < 1e-12);
        sum_p0 += std::norm(s.a0);
    }
    // E[|a0|^2] = 1/2 under the Haar measure.
    CHECK(std::abs(sum_p0 / draws - 0.5) < 0.01);
}

TEST_CASE("norm preservation through gate pipelines") {
    auto s = random_state(5, 91);
    s = apply_hadamard_all(s);
    s = apply_diagonal_phases(s, [](std::size_t b) { return 0.37 * b; });
    TwoQubitUnitary gate;
    const Complex c = std::cos(0.4), is = Complex(0, std::sin(0.4));
    gate(0, 0) = 1.0;
    gate(3, 3) = 1.0;
    gate(1, 1) = c;
    gate(2, 2) = c;
    gate(1, 2) = is;
    gate(2, 1) = is;
    REQUIRE(gate.is_unitary());
    s = apply_two_qubit_gate(s, gate, 2, 4);
    CHECK(s.is_normalized(1e-10));
}
