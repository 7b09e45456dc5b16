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

#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qklab::oracles {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

} // namespace

CMatrix embed_two_qubit_gate(int n_qubits, const CMatrix& gate4, int q_a,
                             int q_b) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim),
                              static_cast<Eigen::Index>(dim));
    for (std::size_t col = 0; col < dim; ++col) {
        const int bit_a = static_cast<int>((col >> q_a) & 1u);
        const int bit_b = static_cast<int>((col >> q_b) & 1u);
        const int sub_in = 2 * bit_a + bit_b;
        const std::size_t cleared =
            col & ~((std::size_t{1} << q_a) | (std::size_t{1} << q_b));
        for (int sub_out = 0; sub_out < 4; ++sub_out) {
            const std::size_t row = cleared |
                (static_cast<std::size_t>(sub_out >> 1) << q_a) |
                (static_cast<std::size_t>(sub_out & 1) << q_b);
            m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
                gate4(sub_out, sub_in);
        }
    }
    return m;
}

CMatrix matrix_exp(const CMatrix& a) {
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    const CMatrix scaled = a * scale;
    CMatrix term = CMatrix::Identity(a.rows(), a.cols());
    CMatrix sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = (term * scaled) / static_cast<double>(k);
        sum += term;
    }
    for (int k = 0; k < squarings; ++k) {
        sum = sum * sum;
    }
    return sum;
}

CMatrix heisenberg_exponential(double theta) {
    CMatrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, -kI, kI, 0;
    z << 1, 0, 0, -1;
    const auto kron = [](const CMatrix& a, const CMatrix& b) {
        CMatrix out(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
        return out;
    };
    const CMatrix h = kron(x, x) + kron(y, y) + kron(z, z);
    return matrix_exp(-kI * theta * h);
}

CVector dense_iqp_state(int d, double scaling, std::span<const double> x) {
    const std::size_t dim = std::size_t{1} << d;
    const Eigen::Index edim = static_cast<Eigen::Index>(dim);

    // H^(x)d entrywise: (1/sqrt(2))^d * (-1)^popcount(r & c).
    CMatrix h_all(edim, edim);
    const double h_scale = std::pow(1.0 / std::sqrt(2.0), d);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            h_all(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                (std::popcount(r & c) % 2 == 0) ? h_scale : -h_scale;

    // Literal term-by-term phase polynomial in the scaled inputs.
    CMatrix diag = CMatrix::Zero(edim, edim);
    for (std::size_t b = 0; b < dim; ++b) {
        double phase = 0.0;
        for (int j = 0; j < d; ++j) {
            const double sj = ((b >> j) & 1u) ? -1.0 : 1.0;
            phase += scaling * x[j] * sj;
            for (int j2 = 0; j2 < d; ++j2) {
                const double sj2 = ((b >> j2) & 1u) ? -1.0 : 1.0;
                phase += scaling * scaling * x[j] * x[j2] * sj * sj2;
            }
        }
        diag(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) =
            std::exp(kI * phase);
    }

    CVector e0 = CVector::Zero(edim);
    e0(0) = 1.0;
    return diag * (h_all * (diag * (h_all * e0)));
}

CVector dense_hamevo_state(const CVector& initial, std::span<const double> x,
                           double time, int trotter_steps) {
    const int d = static_cast<int>(x.size());
    const int n_qubits = d + 1;
    CVector state = initial;
    for (int step = 0; step < trotter_steps; ++step) {
        for (int j = 0; j < d; ++j) {
            const CMatrix gate =
                heisenberg_exponential((time / trotter_steps) * x[j]);
            state = embed_two_qubit_gate(n_qubits, gate, j, j + 1) * state;
        }
    }
    return state;
}

std::complex<double> inner_product_ld(std::span<const Complex> a,
                                      std::span<const Complex> b) {
    long double re = 0.0L;
    long double im = 0.0L;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const long double ar = a[k].real(), ai = a[k].imag();
        const long double br = b[k].real(), bi = b[k].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

void jacobi_eigen_sym(const Eigen::MatrixXd& m, Eigen::VectorXd& values,
                      Eigen::MatrixXd& vectors) {
    const Eigen::Index n = m.rows();
    Eigen::MatrixXd a = 0.5 * (m + m.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (std::sqrt(off) < 1e-15 * scale) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
    values.resize(n);
    vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        values(k) = a(order[static_cast<std::size_t>(k)],
                      order[static_cast<std::size_t>(k)]);
        vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
}

namespace {

// Projection of v onto {0 <= z <= C, y^T z = 0} by bisection on the
// hyperplane multiplier; the per-coordinate solution is a clipped shift.
std::vector<double> project_feasible(const std::vector<double>& v,
                                     std::span<const int> y, double C) {
    const std::size_t n = v.size();
    const auto shifted = [&](double mu, std::size_t i) {
        const double z = v[i] - mu * y[i];
        return std::clamp(z, 0.0, C);
    };
    const auto balance = [&](double mu) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += y[i] * shifted(mu, i);
        return s;
    };
    double bound = C + 1.0;
    for (double vi : v) bound = std::max(bound, std::abs(vi) + C + 1.0);
    double lo = -bound, hi = bound;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (balance(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double mu = 0.5 * (lo + hi);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = shifted(mu, i);
    return z;
}

} // namespace

double dual_objective_ref(const Eigen::MatrixXd& K, std::span<const int> y,
                          std::span<const double> alpha) {
    const std::size_t n = alpha.size();
    double linear = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += alpha[i];
        for (std::size_t j = 0; j < n; ++j)
            quad += alpha[i] * alpha[j] * y[i] * y[j] *
                    K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return linear - 0.5 * quad;
}

std::vector<double> projected_gradient_qp(const Eigen::MatrixXd& K,
                                          std::span<const int> y, double C,
                                          int iterations, double step) {
    const std::size_t n = static_cast<std::size_t>(K.rows());
    Eigen::MatrixXd Q(K.rows(), K.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                y[i] * y[j] *
                K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

    if (step <= 0.0) {
        // Power iteration bound on the Lipschitz constant of the gradient.
        Eigen::VectorXd u = Eigen::VectorXd::Ones(K.rows()).normalized();
        double lambda = 1.0;
        for (int it = 0; it < 50; ++it) {
            Eigen::VectorXd w = Q * u;
            lambda = w.norm();
            if (lambda < 1e-12) break;
            u = w / lambda;
        }
        step = 1.0 / (1.05 * std::max(lambda, 1e-9));
    }

    // FISTA with restarts; minimizes 1/2 a^T Q a - e^T a over the box
    // intersected with the balance hyperplane.
    const auto f = [&](const std::vector<double>& a) {
        return -dual_objective_ref(K, y, std::span<const double>(a));
    };
    std::vector<double> a(n, 0.0), a_prev(n, 0.0), vlk(n, 0.0);
    double t = 1.0;
    double f_prev = f(a);
    int stall = 0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::Map<const Eigen::VectorXd> vm(vlk.data(),
                                             static_cast<Eigen::Index>(n));
        Eigen::VectorXd g = Q * vm - Eigen::VectorXd::Ones(K.rows());
        std::vector<double> cand(n);
        for (std::size_t i = 0; i < n; ++i)
            cand[i] = vlk[i] - step * g(static_cast<Eigen::Index>(i));
        std::vector<double> a_new = project_feasible(cand, y, C);

        const double f_new = f(a_new);
        if (f_new > f_prev) {
            // Momentum restart.
            t = 1.0;
            vlk = a;
            continue;
        }
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = (t - 1.0) / t_new;
            vlk[i] = a_new[i] + m * (a_new[i] - a[i]);
            delta = std::max(delta, std::abs(a_new[i] - a[i]));
        }
        a_prev = a;
        a = a_new;
        t = t_new;
        stall = (f_prev - f_new < 1e-15 && delta < 1e-13) ? stall + 1 : 0;
        f_prev = f_new;
        if (stall > 50) break;
    }
    return a;
}

} // namespace qklab::oracles
