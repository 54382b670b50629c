#pragma once

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "genotype.hpp"

namespace neda {

// Objective function over fixed-length bit strings. Maximization everywhere.
class Problem {
public:
    virtual ~Problem() = default;

    virtual double evaluate(std::span<const std::uint8_t> bits) const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::optional<double> optimum() const { return std::nullopt; }
    virtual std::string name() const = 0;

protected:
    void check_dimension(std::span<const std::uint8_t> bits) const {
        if (bits.size() != dimension()) throw std::invalid_argument(name() + ": dimension mismatch");
    }
};

// Evaluate and cache.
inline double evaluate(const Problem& problem, Genotype& g) {
    if (!g.fitness) g.fitness = problem.evaluate(g.bits);
    return *g.fitness;
}

class MaxOnes final : public Problem {
public:
    explicit MaxOnes(std::size_t dim) : dim_(dim) {}

    double evaluate(std::span<const std::uint8_t> bits) const override {
        check_dimension(bits);
        double s = 0;
        for (auto b : bits) s += b;
        return s;
    }
    std::size_t dimension() const override { return dim_; }
    std::optional<double> optimum() const override { return static_cast<double>(dim_); }
    std::string name() const override { return "maxones"; }

private:
    std::size_t dim_;
};

// Hierarchical if-and-only-if. Uniform blocks of size 2^l contribute 2^l at
// every level including single bits; a mixed block is null and contributes
// nothing at any higher level.
class Hiff final : public Problem {
public:
    explicit Hiff(std::size_t dim) : dim_(dim) {
        if (dim == 0 || (dim & (dim - 1)) != 0) throw std::invalid_argument("hiff: length must be a power of two");
    }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        check_dimension(bits);
        constexpr std::uint8_t kNull = 2;
        std::vector<std::uint8_t> level(bits.begin(), bits.end());
        double total = static_cast<double>(dim_); // level 0: every bit contributes 1
        double block_value = 2.0;
        while (level.size() > 1) {
            std::vector<std::uint8_t> next(level.size() / 2);
            for (std::size_t i = 0; i < next.size(); ++i) {
                const auto a = level[2 * i], b = level[2 * i + 1];
                if (a != kNull && a == b) {
                    next[i] = a;
                    total += block_value;
                } else {
                    next[i] = kNull;
                }
            }
            level = std::move(next);
            block_value *= 2.0;
        }
        return total;
    }
    std::size_t dimension() const override { return dim_; }
    std::optional<double> optimum() const override {
        std::size_t levels = 0;
        for (std::size_t d = dim_; d > 1; d >>= 1) ++levels;
        return static_cast<double>((levels + 1) * dim_);
    }
    std::string name() const override { return "hiff"; }

private:
    std::size_t dim_;
};

// Royal Road: non-overlapping all-ones blocks, each complete block
// contributes its own size.
class RoyalRoad final : public Problem {
public:
    explicit RoyalRoad(std::size_t dim, std::size_t block_size = 8) : dim_(dim), block_(block_size) {
        if (block_size == 0 || dim % block_size != 0)
            throw std::invalid_argument("royalroad: length must be a multiple of the block size");
    }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        check_dimension(bits);
        double total = 0;
        for (std::size_t start = 0; start < dim_; start += block_) {
            bool complete = true;
            for (std::size_t i = start; i < start + block_; ++i)
                if (!bits[i]) { complete = false; break; }
            if (complete) total += static_cast<double>(block_);
        }
        return total;
    }
    std::size_t dimension() const override { return dim_; }
    std::optional<double> optimum() const override { return static_cast<double>(dim_); }
    std::string name() const override { return "royalroad"; }
    std::size_t block_size() const { return block_; }

private:
    std::size_t dim_;
    std::size_t block_;
};

// Royal Road with linkages: n partitions of size 2k. A partition scores 1
// when its halves are uniform and opposite (1^k 0^k or 0^k 1^k); one extra
// point when the first-left and last-right sub-partitions are both all-ones
// or both all-zeros.
class RrLinkages final : public Problem {
public:
    RrLinkages(std::size_t k, std::size_t n) : k_(k), n_(n) {
        if (k < 1 || n < 2) throw std::invalid_argument("rrlinkages: require k >= 1 and n >= 2");
    }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        check_dimension(bits);
        double total = 0;
        for (std::size_t p = 0; p < n_; ++p) {
            const auto left = uniform_value(bits, p * 2 * k_);
            const auto right = uniform_value(bits, p * 2 * k_ + k_);
            if (left >= 0 && right >= 0 && left != right) total += 1.0;
        }
        const auto first_left = uniform_value(bits, 0);
        const auto last_right = uniform_value(bits, (n_ - 1) * 2 * k_ + k_);
        if (first_left >= 0 && first_left == last_right) total += 1.0;
        return total;
    }
    std::size_t dimension() const override { return 2 * k_ * n_; }
    std::optional<double> optimum() const override { return static_cast<double>(n_ + 1); }
    std::string name() const override { return "rrlinkages"; }
    std::size_t k() const { return k_; }
    std::size_t n() const { return n_; }

private:
    // 0/1 when the k-bit group is uniform, -1 otherwise
    int uniform_value(std::span<const std::uint8_t> bits, std::size_t start) const {
        const std::uint8_t v = bits[start];
        for (std::size_t i = start + 1; i < start + k_; ++i)
            if (bits[i] != v) return -1;
        return v;
    }

    std::size_t k_;
    std::size_t n_;
};

// XOR-mask wrapper: evaluates the inner problem on (g XOR mask). The mask is
// fixed for the lifetime of a trial.
class MaskedProblem final : public Problem {
public:
    MaskedProblem(std::shared_ptr<const Problem> inner, Bits mask)
        : inner_(std::move(inner)), mask_(std::move(mask)) {
        if (mask_.size() != inner_->dimension())
            throw std::invalid_argument("maskedproblem: mask length mismatch");
    }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        check_dimension(bits);
        Bits unmasked(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) unmasked[i] = bits[i] ^ mask_[i];
        return inner_->evaluate(unmasked);
    }
    std::size_t dimension() const override { return inner_->dimension(); }
    std::optional<double> optimum() const override { return inner_->optimum(); }
    std::string name() const override { return inner_->name() + "+mask"; }
    const Bits& mask() const { return mask_; }

private:
    std::shared_ptr<const Problem> inner_;
    Bits mask_;
};

} // namespace neda
