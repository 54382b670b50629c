#pragma once

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genotype.hpp"
#include "rng.hpp"

namespace neda {

enum class CorruptionKind {
    replace_uniform, // bit replaced by a fresh uniform bit with probability p
    zero_mask        // bit forced to 0 with probability p
};

inline Bits corrupt(std::span<const std::uint8_t> bits, double p, RngStream& rng,
                    CorruptionKind kind = CorruptionKind::replace_uniform) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("corrupt: p must be in [0,1]");
    Bits out(bits.begin(), bits.end());
    for (auto& bit : out) {
        if (rng.bernoulli(p)) bit = (kind == CorruptionKind::replace_uniform) ? rng.random_bit() : 0;
    }
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Denoising autoencoder with Bernoulli outputs. Trained online with
// minibatch SGD on per-bit cross-entropy against the uncorrupted input;
// sampling corrupts the input, runs the forward pass and draws each output
// bit from its Bernoulli parameter.
class DaModel {
public:
    DaModel(std::size_t dim, std::size_t hidden, double corruption_level, double learning_rate,
            RngStream& rng, CorruptionKind corruption_kind = CorruptionKind::replace_uniform)
        : dim_(dim), hidden_(hidden), corruption_level_(corruption_level),
          learning_rate_(learning_rate), corruption_kind_(corruption_kind),
          enc_w_(hidden * dim), enc_b_(hidden, 0.0), dec_w_(dim * hidden), dec_b_(dim, 0.0) {
        if (dim < 1 || hidden < 1) throw std::invalid_argument("DaModel: dims must be >= 1");
        const double bound = std::sqrt(6.0 / static_cast<double>(dim + hidden));
        for (auto& w : enc_w_) w = (2.0 * rng.next_double() - 1.0) * bound;
        for (auto& w : dec_w_) w = (2.0 * rng.next_double() - 1.0) * bound;
    }

    std::size_t dimension() const { return dim_; }
    std::size_t hidden_units() const { return hidden_; }
    double corruption_level() const { return corruption_level_; }
    double learning_rate() const { return learning_rate_; }
    CorruptionKind corruption_kind() const { return corruption_kind_; }

    std::vector<double> hidden_activation(std::span<const std::uint8_t> x) const {
        check_input(x);
        std::vector<double> h(hidden_);
        for (std::size_t j = 0; j < hidden_; ++j) {
            double a = enc_b_[j];
            const double* row = &enc_w_[j * dim_];
            for (std::size_t i = 0; i < dim_; ++i)
                if (x[i]) a += row[i];
            h[j] = sigmoid(a);
        }
        return h;
    }

    std::vector<double> decode(const std::vector<double>& h) const {
        std::vector<double> y(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            double a = dec_b_[i];
            const double* row = &dec_w_[i * hidden_];
            for (std::size_t j = 0; j < hidden_; ++j) a += row[j] * h[j];
            y[i] = sigmoid(a);
        }
        return y;
    }

    // y = sigmoid(W' sigmoid(W x + b) + b'), deterministic.
    std::vector<double> forward(std::span<const std::uint8_t> x) const { return decode(hidden_activation(x)); }

    // One SGD step on the mean gradient over the corrupted batch. Returns
    // the mean per-bit cross-entropy against the uncorrupted inputs.
    double train_minibatch(const std::vector<Bits>& batch, RngStream& rng) {
        if (batch.empty()) throw std::invalid_argument("da_train: empty batch");
        std::vector<double> g_enc_w(enc_w_.size(), 0.0), g_enc_b(hidden_, 0.0);
        std::vector<double> g_dec_w(dec_w_.size(), 0.0), g_dec_b(dim_, 0.0);
        double total_loss = 0;
        for (const auto& x : batch) {
            check_input(x);
            const Bits noisy = corrupt(x, corruption_level_, rng, corruption_kind_);
            const auto h = hidden_activation(noisy);
            const auto y = decode(h);
            total_loss += cross_entropy(y, x);
            // d(per-bit mean BCE)/d(decoder pre-activation)
            std::vector<double> delta_out(dim_);
            for (std::size_t i = 0; i < dim_; ++i) {
                delta_out[i] = (y[i] - static_cast<double>(x[i])) / static_cast<double>(dim_);
                g_dec_b[i] += delta_out[i];
                double* row = &g_dec_w[i * hidden_];
                for (std::size_t j = 0; j < hidden_; ++j) row[j] += delta_out[i] * h[j];
            }
            for (std::size_t j = 0; j < hidden_; ++j) {
                double dh = 0;
                for (std::size_t i = 0; i < dim_; ++i) dh += delta_out[i] * dec_w_[i * hidden_ + j];
                const double da = dh * h[j] * (1.0 - h[j]);
                g_enc_b[j] += da;
                double* row = &g_enc_w[j * dim_];
                for (std::size_t i = 0; i < dim_; ++i)
                    if (noisy[i]) row[i] += da;
            }
        }
        const double mean_loss = total_loss / static_cast<double>(batch.size());
        if (!std::isfinite(mean_loss)) throw std::runtime_error("da_train: non-finite loss");
        const double scale = learning_rate_ / static_cast<double>(batch.size());
        apply_step(enc_w_, g_enc_w, scale);
        apply_step(enc_b_, g_enc_b, scale);
        apply_step(dec_w_, g_dec_w, scale);
        apply_step(dec_b_, g_dec_b, scale);
        return mean_loss;
    }

    // Corrupt the input, run it through the network and draw each output
    // bit from a Bernoulli with the decoder's parameter.
    Bits sample(std::span<const std::uint8_t> x, RngStream& rng) const {
        const Bits noisy = corrupt(x, corruption_level_, rng, corruption_kind_);
        const auto y = forward(noisy);
        Bits out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out[i] = rng.bernoulli(y[i]) ? 1 : 0;
        return out;
    }

    double cross_entropy(const std::vector<double>& y, std::span<const std::uint8_t> x) const {
        // per-bit mean, probabilities clamped inside the loss only
        constexpr double eps = 1e-7;
        double loss = 0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double p = std::min(1.0 - eps, std::max(eps, y[i]));
            loss += x[i] ? -std::log(p) : -std::log(1.0 - p);
        }
        return loss / static_cast<double>(dim_);
    }

    void save(std::ostream& out) const {
        out << "neda-da 1\n"
            << dim_ << ' ' << hidden_ << ' '
            << (corruption_kind_ == CorruptionKind::zero_mask ? "zero_mask" : "replace_uniform") << '\n';
        out << std::hexfloat;
        out << corruption_level_ << ' ' << learning_rate_ << '\n';
        dump(out, enc_w_);
        dump(out, enc_b_);
        dump(out, dec_w_);
        dump(out, dec_b_);
        out << std::defaultfloat;
    }

    static DaModel load(std::istream& in) {
        std::string magic;
        int version = 0;
        in >> magic >> version;
        if (magic != "neda-da" || version != 1) throw std::runtime_error("da checkpoint: bad header");
        std::size_t dim = 0, hidden = 0;
        std::string kind_name;
        in >> dim >> hidden >> kind_name;
        DaModel m(dim, hidden, kind_name);
        m.corruption_level_ = read_double(in);
        m.learning_rate_ = read_double(in);
        slurp(in, m.enc_w_);
        slurp(in, m.enc_b_);
        slurp(in, m.dec_w_);
        slurp(in, m.dec_b_);
        if (!in) throw std::runtime_error("da checkpoint: truncated");
        return m;
    }

    // raw parameter access (tests, finite-difference oracles)
    std::vector<double>& encoder_weights() { return enc_w_; }
    std::vector<double>& encoder_bias() { return enc_b_; }
    std::vector<double>& decoder_weights() { return dec_w_; }
    std::vector<double>& decoder_bias() { return dec_b_; }
    void set_learning_rate(double lr) { learning_rate_ = lr; }
    void set_corruption_level(double p) { corruption_level_ = p; }

private:
    DaModel(std::size_t dim, std::size_t hidden, const std::string& kind_name)
        : dim_(dim), hidden_(hidden), corruption_level_(0), learning_rate_(0),
          corruption_kind_(kind_name == "zero_mask" ? CorruptionKind::zero_mask
                                                    : CorruptionKind::replace_uniform),
          enc_w_(hidden * dim), enc_b_(hidden), dec_w_(dim * hidden), dec_b_(dim) {}

    void check_input(std::span<const std::uint8_t> x) const {
        if (x.size() != dim_) throw std::invalid_argument("DaModel: input length mismatch");
    }

    static void apply_step(std::vector<double>& param, const std::vector<double>& grad, double scale) {
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
    double corruption_level_;
    double learning_rate_;
    CorruptionKind corruption_kind_;
    std::vector<double> enc_w_; // H x D
    std::vector<double> enc_b_; // H
    std::vector<double> dec_w_; // D x H
    std::vector<double> dec_b_; // D
};

} // namespace neda
