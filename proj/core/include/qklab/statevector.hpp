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

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qklab/errors.hpp"
#include "qklab/rng.hpp"

namespace qklab {

using Complex = std::complex<double>;

/// Largest qubit count accepted by default. Callers with more memory may
/// raise it per call.
inline constexpr int kDefaultMaxQubits = 26;

/// A pure single-qubit state: amplitudes of |0> and |1>.
struct SingleQubitState {
    Complex a0;
    Complex a1;

    double norm_sq() const { return std::norm(a0) + std::norm(a1); }
};

/// Dense 4x4 unitary acting on an ordered qubit pair (a, b).
///
/// Rows and columns are indexed by the two-bit value 2*bit_a + 2^0*bit_b,
/// i.e. the first qubit of the pair is the high bit of the sub-index.
class TwoQubitUnitary {
  public:
    TwoQubitUnitary() = default;

    static TwoQubitUnitary identity() {
        TwoQubitUnitary u;
        for (int i = 0; i < 4; ++i) {
            u(i, i) = Complex(1.0, 0.0);
        }
        return u;
    }

    Complex& operator()(int row, int col) { return m_[4 * row + col]; }
    Complex operator()(int row, int col) const { return m_[4 * row + col]; }

    /// Entry-wise check of U^dagger U = I.
    bool is_unitary(double tol = 1e-10) const;

    /// The same operator expressed on the reversed pair (b, a): rows and
    /// columns permuted by swapping the two sub-index bits.
    TwoQubitUnitary swapped_qubits() const;

  private:
    std::array<Complex, 16> m_{};
};

/// Exact complex statevector over n qubits.
///
/// Bit ordering: qubit q occupies bit q of the basis-state index, least
/// significant first, so basis index b assigns qubit q the bit (b >> q) & 1.
/// This is the single canonical convention; every module in the library
/// relies on it and one test asserts it explicitly.
///
/// Instances are immutable from the caller's perspective: every gate
/// operation returns a new value. The constructor checks only the length
/// invariant so that tests may build unnormalized superpositions; use
/// is_normalized() where the unit-norm invariant matters.
class StateVector {
  public:
    StateVector(int n_qubits, std::vector<Complex> amplitudes);

    /// |0...0>: amplitude 1 at index 0.
    static StateVector zero_state(int n_qubits, int max_qubits = kDefaultMaxQubits);

    /// Tensor product of single-qubit factors; factor j becomes qubit j.
    static StateVector product_state(std::span<const SingleQubitState> factors,
                                     int max_qubits = kDefaultMaxQubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    Complex amplitude(std::size_t index) const { return amplitudes_[index]; }

    double norm() const;
    bool is_normalized(double tol = 1e-10) const;

  private:
    int n_qubits_;
    std::vector<Complex> amplitudes_;

    friend StateVector apply_hadamard_all(const StateVector&);
    friend StateVector
    apply_diagonal_phases(const StateVector&,
                          const std::function<double(std::size_t)>&);
    friend StateVector apply_two_qubit_gate(const StateVector&,
                                            const TwoQubitUnitary&, int, int);
};

/// H applied to every qubit. Involution: applying twice restores the input.
StateVector apply_hadamard_all(const StateVector& state);

/// Multiplies the amplitude at basis index b by exp(i * phase(b)).
/// Throws InputError if any phase is non-finite.
StateVector
apply_diagonal_phases(const StateVector& state,
                      const std::function<double(std::size_t)>& phase);

/// Applies `gate` to the qubit pair (q_a, q_b), identity elsewhere.
/// Throws IndexError if q_a == q_b or either index is out of range.
StateVector apply_two_qubit_gate(const StateVector& state,
                                 const TwoQubitUnitary& gate, int q_a, int q_b);

/// <a|b> = sum_k conj(a_k) * b_k. Throws InputError on mismatched qubit counts.
Complex inner_product(const StateVector& a, const StateVector& b);

/// |<a|b>|^2, the fidelity kernel value of the two embeddings.
double fidelity(const StateVector& a, const StateVector& b);

/// Haar-random single-qubit state: four independent standard normals as the
/// real and imaginary parts of the two amplitudes, normalized. The all-zero
/// draw (probability zero) is re-drawn.
SingleQubitState sample_haar_single_qubit(Rng& rng);

namespace detail {

// In-place kernels behind the value-returning operations above. embed()
// pipelines use these to sweep a private buffer without intermediate copies.
void hadamard_all_in_place(std::vector<Complex>& amps, int n_qubits);
void diagonal_phases_in_place(std::vector<Complex>& amps,
                              const std::function<double(std::size_t)>& phase);
void two_qubit_gate_in_place(std::vector<Complex>& amps, int n_qubits,
                             const TwoQubitUnitary& gate, int q_a, int q_b);

/// Throws CapacityError unless 1 <= n_qubits <= max_qubits.
void check_qubit_capacity(int n_qubits, int max_qubits);

} // namespace detail

} // namespace qklab
