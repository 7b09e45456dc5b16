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

#include "qklab/statevector.hpp"

#include <cmath>
#include <string>

namespace qklab {

bool TwoQubitUnitary::is_unitary(double tol) const {
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            Complex dot(0.0, 0.0);
            for (int k = 0; k < 4; ++k) {
                dot += std::conj((*this)(k, r)) * (*this)(k, c);
            }
            const Complex expected = (r == c) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
            if (std::abs(dot - expected) > tol) {
                return false;
            }
        }
    }
    return true;
}

TwoQubitUnitary TwoQubitUnitary::swapped_qubits() const {
    auto swap_bits = [](int i) { return ((i & 1) << 1) | ((i >> 1) & 1); };
    TwoQubitUnitary out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            out(swap_bits(r), swap_bits(c)) = (*this)(r, c);
        }
    }
    return out;
}

namespace detail {

void check_qubit_capacity(int n_qubits, int max_qubits) {
    if (n_qubits < 1) {
        throw InputError("qubit count must be at least 1, got " +
                         std::to_string(n_qubits));
    }
    if (n_qubits > max_qubits) {
        throw CapacityError("requested " + std::to_string(n_qubits) +
                            " qubits, above the configured maximum of " +
                            std::to_string(max_qubits));
    }
}

void hadamard_all_in_place(std::vector<Complex>& amps, int n_qubits) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    const std::size_t dim = amps.size();
    for (int q = 0; q < n_qubits; ++q) {
        const std::size_t stride = std::size_t{1} << q;
        const std::size_t period = stride << 1;
        for (std::size_t base = 0; base < dim; base += period) {
            for (std::size_t k = 0; k < stride; ++k) {
                const std::size_t i0 = base + k;
                const std::size_t i1 = i0 + stride;
                const Complex a = amps[i0];
                const Complex b = amps[i1];
                amps[i0] = (a + b) * inv_sqrt2;
                amps[i1] = (a - b) * inv_sqrt2;
            }
        }
    }
}

void diagonal_phases_in_place(std::vector<Complex>& amps,
                              const std::function<double(std::size_t)>& phase) {
    const std::size_t dim = amps.size();
    for (std::size_t b = 0; b < dim; ++b) {
        const double angle = phase(b);
        if (!std::isfinite(angle)) {
            throw InputError("diagonal phase at basis index " +
                             std::to_string(b) + " is not finite");
        }
        amps[b] *= Complex(std::cos(angle), std::sin(angle));
    }
}

void two_qubit_gate_in_place(std::vector<Complex>& amps, int n_qubits,
                             const TwoQubitUnitary& gate, int q_a, int q_b) {
    if (q_a == q_b) {
        throw IndexError("two-qubit gate requires distinct qubits, got " +
                         std::to_string(q_a) + " twice");
    }
    if (q_a < 0 || q_a >= n_qubits || q_b < 0 || q_b >= n_qubits) {
        throw IndexError("qubit pair (" + std::to_string(q_a) + ", " +
                         std::to_string(q_b) + ") out of range for " +
                         std::to_string(n_qubits) + " qubits");
    }
    const std::size_t dim = amps.size();
    const std::size_t bit_a = std::size_t{1} << q_a;
    const std::size_t bit_b = std::size_t{1} << q_b;
    const std::size_t mask = bit_a | bit_b;
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & mask) != 0) {
            continue; // visit each 4-amplitude block once, at its 00 corner
        }
        const std::size_t i00 = i;
        const std::size_t i01 = i | bit_b;
        const std::size_t i10 = i | bit_a;
        const std::size_t i11 = i | mask;
        const std::array<Complex, 4> in{amps[i00], amps[i01], amps[i10],
                                        amps[i11]};
        for (int r = 0; r < 4; ++r) {
            Complex acc(0.0, 0.0);
            for (int c = 0; c < 4; ++c) {
                acc += gate(r, c) * in[c];
            }
            const std::size_t idx = i | ((r & 2) ? bit_a : 0) | ((r & 1) ? bit_b : 0);
            amps[idx] = acc;
        }
    }
}

} // namespace detail

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    if (n_qubits_ < 1 || n_qubits_ >= 63) {
        throw InputError("invalid qubit count " + std::to_string(n_qubits_));
    }
    const std::size_t expected = std::size_t{1} << n_qubits_;
    if (amplitudes_.size() != expected) {
        throw InputError("amplitude vector has length " +
                         std::to_string(amplitudes_.size()) + ", expected 2^" +
                         std::to_string(n_qubits_) + " = " +
                         std::to_string(expected));
    }
}

StateVector StateVector::zero_state(int n_qubits, int max_qubits) {
    detail::check_qubit_capacity(n_qubits, max_qubits);
    std::vector<Complex> amps(std::size_t{1} << n_qubits, Complex(0.0, 0.0));
    amps[0] = Complex(1.0, 0.0);
    return StateVector(n_qubits, std::move(amps));
}

StateVector StateVector::product_state(std::span<const SingleQubitState> factors,
                                       int max_qubits) {
    if (factors.empty()) {
        throw InputError("product_state requires at least one factor");
    }
    const int n = static_cast<int>(factors.size());
    detail::check_qubit_capacity(n, max_qubits);
    std::vector<Complex> amps(std::size_t{1} << n);
    for (std::size_t b = 0; b < amps.size(); ++b) {
        Complex value(1.0, 0.0);
        for (int q = 0; q < n; ++q) {
            value *= ((b >> q) & 1) ? factors[q].a1 : factors[q].a0;
        }
        amps[b] = value;
    }
    return StateVector(n, std::move(amps));
}

double StateVector::norm() const {
    double sum = 0.0;
    for (const Complex& a : amplitudes_) {
        sum += std::norm(a);
    }
    return std::sqrt(sum);
}

bool StateVector::is_normalized(double tol) const {
    return std::abs(norm() * norm() - 1.0) <= tol;
}

StateVector apply_hadamard_all(const StateVector& state) {
    StateVector out = state;
    detail::hadamard_all_in_place(out.amplitudes_, out.n_qubits_);
    return out;
}

StateVector
apply_diagonal_phases(const StateVector& state,
                      const std::function<double(std::size_t)>& phase) {
    StateVector out = state;
    detail::diagonal_phases_in_place(out.amplitudes_, phase);
    return out;
}

StateVector apply_two_qubit_gate(const StateVector& state,
                                 const TwoQubitUnitary& gate, int q_a, int q_b) {
    StateVector out = state;
    detail::two_qubit_gate_in_place(out.amplitudes_, out.n_qubits_, gate, q_a,
                                    q_b);
    return out;
}

Complex inner_product(const StateVector& a, const StateVector& b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw InputError("inner product of states with " +
                         std::to_string(a.n_qubits()) + " and " +
                         std::to_string(b.n_qubits()) + " qubits");
    }
    Complex acc(0.0, 0.0);
    const auto av = a.amplitudes();
    const auto bv = b.amplitudes();
    for (std::size_t k = 0; k < av.size(); ++k) {
        acc += std::conj(av[k]) * bv[k];
    }
    return acc;
}

double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(inner_product(a, b));
}

SingleQubitState sample_haar_single_qubit(Rng& rng) {
    while (true) {
        const Complex a0(rng.normal(), rng.normal());
        const Complex a1(rng.normal(), rng.normal());
        const double norm_sq = std::norm(a0) + std::norm(a1);
        if (norm_sq == 0.0) {
            continue;
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        return SingleQubitState{a0 * inv, a1 * inv};
    }
}

} // namespace qklab
