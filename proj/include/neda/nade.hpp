#pragma once

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "da.hpp" // sigmoid
#include "genotype.hpp"
#include "rng.hpp"

namespace neda {

// Per-position sampling constraint: -1 = free, 0/1 = clamped value.
using ClampSpec = std::vector<int>;

// Neural autoregressive distribution estimator over binary strings.
// P(x) = prod_i P(x_i | x_<i) with P(x_i=1|x_<i) = sigmoid(b_i + V_i . h_i),
// h_i = sigmoid(c + W_{.,<i} x_<i); the hidden pre-activation is shared and
// accumulated incrementally, so likelihood, gradients and sampling are all
// O(D*H). Exact likelihood, exact gradients.
class NadeModel {
public:
    NadeModel(std::size_t dim, std::size_t hidden, double learning_rate, RngStream& rng,
              std::vector<std::size_t> ordering = {})
        : dim_(dim), hidden_(hidden), learning_rate_(learning_rate),
          w_(hidden * dim), visible_b_(dim, 0.0), hidden_b_(hidden, 0.0), v_(dim * hidden),
          ordering_(std::move(ordering)) {
        if (dim < 1 || hidden < 1) throw std::invalid_argument("NadeModel: dims must be >= 1");
        if (ordering_.empty()) {
            ordering_.resize(dim);
            std::iota(ordering_.begin(), ordering_.end(), std::size_t{0});
        }
        validate_ordering();
        const double bound = std::sqrt(6.0 / static_cast<double>(dim + hidden));
        for (auto& x : w_) x = (2.0 * rng.next_double() - 1.0) * bound;
        for (auto& x : v_) x = (2.0 * rng.next_double() - 1.0) * bound;
    }

    std::size_t dimension() const { return dim_; }
    std::size_t hidden_units() const { return hidden_; }
    double learning_rate() const { return learning_rate_; }
    const std::vector<std::size_t>& ordering() const { return ordering_; }

    double log_likelihood(std::span<const std::uint8_t> x) const {
        check_input(x);
        std::vector<double> acc(hidden_b_);
        std::vector<double> h(hidden_);
        double ll = 0;
        for (std::size_t t = 0; t < dim_; ++t) {
            const std::size_t i = ordering_[t];
            for (std::size_t j = 0; j < hidden_; ++j) h[j] = sigmoid(acc[j]);
            const double p = conditional(i, h);
            ll += x[i] ? safe_log(p) : safe_log(1.0 - p);
            if (x[i])
                for (std::size_t j = 0; j < hidden_; ++j) acc[j] += w_[j * dim_ + i];
        }
        return ll;
    }

    // P(bit at ordering position t is 1 | the t earlier positions of x).
    double conditional_probability(std::span<const std::uint8_t> x, std::size_t t) const {
        check_input(x);
        if (t >= dim_) throw std::invalid_argument("NadeModel: ordering position out of range");
        std::vector<double> acc(hidden_b_);
        for (std::size_t s = 0; s < t; ++s) {
            const std::size_t i = ordering_[s];
            if (x[i])
                for (std::size_t j = 0; j < hidden_; ++j) acc[j] += w_[j * dim_ + i];
        }
        std::vector<double> h(hidden_);
        for (std::size_t j = 0; j < hidden_; ++j) h[j] = sigmoid(acc[j]);
        return conditional(ordering_[t], h);
    }

    // One SGD step on the exact mean NLL gradient; returns the mean NLL.
    double train_minibatch(const std::vector<Bits>& batch) {
        if (batch.empty()) throw std::invalid_argument("nade_train: empty batch");
        std::vector<double> g_w(w_.size(), 0.0), g_vb(dim_, 0.0), g_hb(hidden_, 0.0), g_v(v_.size(), 0.0);
        double total_nll = 0;
        std::vector<double> acc(hidden_), h_all(dim_ * hidden_), p_all(dim_), delta(hidden_);
        for (const auto& x : batch) {
            check_input(x);
            acc = hidden_b_;
            for (std::size_t t = 0; t < dim_; ++t) {
                const std::size_t i = ordering_[t];
                double* h = &h_all[t * hidden_];
                for (std::size_t j = 0; j < hidden_; ++j) h[j] = sigmoid(acc[j]);
                const double p = conditional(i, std::span(h, hidden_));
                p_all[t] = p;
                total_nll -= x[i] ? safe_log(p) : safe_log(1.0 - p);
                if (x[i])
                    for (std::size_t j = 0; j < hidden_; ++j) acc[j] += w_[j * dim_ + i];
            }
            std::fill(delta.begin(), delta.end(), 0.0);
            for (std::size_t t = dim_; t-- > 0;) {
                const std::size_t i = ordering_[t];
                const double* h = &h_all[t * hidden_];
                const double dpre = p_all[t] - static_cast<double>(x[i]);
                g_vb[i] += dpre;
                double* gv_row = &g_v[i * hidden_];
                const double* v_row = &v_[i * hidden_];
                for (std::size_t j = 0; j < hidden_; ++j) {
                    gv_row[j] += dpre * h[j];
                    delta[j] += dpre * v_row[j] * h[j] * (1.0 - h[j]);
                }
                if (t > 0) {
                    const std::size_t prev = ordering_[t - 1];
                    if (x[prev])
                        for (std::size_t j = 0; j < hidden_; ++j) g_w[j * dim_ + prev] += delta[j];
                }
            }
            for (std::size_t j = 0; j < hidden_; ++j) g_hb[j] += delta[j];
        }
        const double mean_nll = total_nll / static_cast<double>(batch.size());
        if (!std::isfinite(mean_nll)) throw std::runtime_error("nade_train: non-finite loss");
        const double scale = learning_rate_ / static_cast<double>(batch.size());
        step(w_, g_w, scale);
        step(visible_b_, g_vb, scale);
        step(hidden_b_, g_hb, scale);
        step(v_, g_v, scale);
        return mean_nll;
    }

    // Ancestral sampling in the model's ordering. Clamped positions take the
    // fixed value instead of being drawn but still feed the recurrence.
    Bits sample(RngStream& rng, const ClampSpec& clamp = {}) const {
        if (!clamp.empty() && clamp.size() != dim_)
            throw std::invalid_argument("nade_sample: clamp length mismatch");
        Bits x(dim_, 0);
        std::vector<double> acc(hidden_b_);
        std::vector<double> h(hidden_);
        for (std::size_t t = 0; t < dim_; ++t) {
            const std::size_t i = ordering_[t];
            for (std::size_t j = 0; j < hidden_; ++j) h[j] = sigmoid(acc[j]);
            const double p = conditional(i, h);
            if (!clamp.empty() && clamp[i] >= 0) {
                x[i] = static_cast<std::uint8_t>(clamp[i]);
            } else {
                x[i] = rng.bernoulli(p) ? 1 : 0;
            }
            if (x[i])
                for (std::size_t j = 0; j < hidden_; ++j) acc[j] += w_[j * dim_ + i];
        }
        return x;
    }

    // Exhaustive probability table over {0,1}^D; index bit i is x_i.
    std::vector<double> exact_distribution() const {
        if (dim_ > 16) throw std::runtime_error("nade_exact_distribution: D too large");
        const std::size_t count = std::size_t{1} << dim_;
        std::vector<double> table(count);
        Bits x(dim_);
        for (std::size_t idx = 0; idx < count; ++idx) {
            for (std::size_t i = 0; i < dim_; ++i) x[i] = (idx >> i) & 1u;
            table[idx] = std::exp(log_likelihood(x));
        }
        return table;
    }

    void save(std::ostream& out) const {
        out << "neda-nade 1\n" << dim_ << ' ' << hidden_ << '\n';
        for (std::size_t i = 0; i < dim_; ++i) out << (i ? " " : "") << ordering_[i];
        out << '\n' << std::hexfloat << learning_rate_ << '\n';
        dump(out, w_);
        dump(out, visible_b_);
        dump(out, hidden_b_);
        dump(out, v_);
        out << std::defaultfloat;
    }

    static NadeModel load(std::istream& in) {
        std::string magic;
        int version = 0;
        in >> magic >> version;
        if (magic != "neda-nade" || version != 1) throw std::runtime_error("nade checkpoint: bad header");
        std::size_t dim = 0, hidden = 0;
        in >> dim >> hidden;
        NadeModel m(dim, hidden);
        for (auto& o : m.ordering_) in >> o;
        m.validate_ordering();
        m.learning_rate_ = read_double(in);
        slurp(in, m.w_);
        slurp(in, m.visible_b_);
        slurp(in, m.hidden_b_);
        slurp(in, m.v_);
        if (!in) throw std::runtime_error("nade checkpoint: truncated");
        return m;
    }

    // raw parameter access (tests, finite-difference oracles)
    std::vector<double>& shared_weights() { return w_; }
    std::vector<double>& visible_bias() { return visible_b_; }
    std::vector<double>& hidden_bias() { return hidden_b_; }
    std::vector<double>& output_weights() { return v_; }
    void set_learning_rate(double lr) { learning_rate_ = lr; }

private:
    NadeModel(std::size_t dim, std::size_t hidden)
        : dim_(dim), hidden_(hidden), learning_rate_(0), w_(hidden * dim), visible_b_(dim),
          hidden_b_(hidden), v_(dim * hidden), ordering_(dim) {}

    void validate_ordering() const {
        if (ordering_.size() != dim_) throw std::invalid_argument("NadeModel: ordering length mismatch");
        std::vector<bool> seen(dim_, false);
        for (auto i : ordering_) {
            if (i >= dim_ || seen[i]) throw std::invalid_argument("NadeModel: ordering is not a permutation");
            seen[i] = true;
        }
    }

    void check_input(std::span<const std::uint8_t> x) const {
        if (x.size() != dim_) throw std::invalid_argument("NadeModel: input length mismatch");
    }

    double conditional(std::size_t i, std::span<const double> h) const {
        double a = visible_b_[i];
        const double* row = &v_[i * hidden_];
        for (std::size_t j = 0; j < hidden_; ++j) a += row[j] * h[j];
        return sigmoid(a);
    }
    double conditional(std::size_t i, const std::vector<double>& h) const {
        return conditional(i, std::span(h.data(), h.size()));
    }

    static double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

    static void step(std::vector<double>& param, const std::vector<double>& grad, double scale) {
        for (std::size_t i = 0; i < param.size(); ++i) param[i] -= scale * grad[i];
    }

    static void dump(std::ostream& out, const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
        out << '\n';
    }
    static double read_double(std::istream& in) {
        std::string tok;
        in >> tok;
        return std::strtod(tok.c_str(), nullptr);
    }
    static void slurp(std::istream& in, std::vector<double>& v) {
        for (auto& x : v) x = read_double(in);
    }

    std::size_t dim_;
    std::size_t hidden_;
    double learning_rate_;
    std::vector<double> w_;         // H x D shared weights, column i feeds later conditionals
    std::vector<double> visible_b_; // D
    std::vector<double> hidden_b_;  // H
    std::vector<double> v_;         // D x H output weights
    std::vector<std::size_t> ordering_;
};

} // namespace neda
