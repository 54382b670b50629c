#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "problem.hpp"
#include "rng.hpp"

namespace neda {

// Multi-dimensional knapsack instance. File format:
//   line 1:        N m
//   line 2:        N item values
//   next m lines:  N weights each
//   last line:     m capacities
// whitespace-separated decimal integers.
struct KnapsackInstance {
    std::vector<double> values;               // v_j, length N
    std::vector<std::vector<double>> weights; // m rows of length N
    std::vector<double> capacities;           // c_i, length m
    std::optional<double> optimum;

    std::size_t num_items() const { return values.size(); }
    std::size_t num_constraints() const { return capacities.size(); }

    void validate() const {
        if (values.empty() || capacities.empty()) throw std::invalid_argument("knapsack: need N >= 1 and m >= 1");
        if (weights.size() != capacities.size()) throw std::invalid_argument("knapsack: weight rows != constraints");
        for (const auto& row : weights)
            if (row.size() != values.size()) throw std::invalid_argument("knapsack: weight row length != N");
        for (double v : values)
            if (v <= 0) throw std::invalid_argument("knapsack: values must be positive");
        for (const auto& row : weights)
            for (double w : row)
                if (w < 0) throw std::invalid_argument("knapsack: weights must be non-negative");
    }
};

inline KnapsackInstance parse_knapsack(std::istream& in) {
    KnapsackInstance inst;
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw std::runtime_error("knapsack: malformed header line");
    inst.values.resize(n);
    for (auto& v : inst.values)
        if (!(in >> v)) throw std::runtime_error("knapsack: malformed values line");
    inst.weights.assign(m, std::vector<double>(n));
    for (auto& row : inst.weights)
        for (auto& w : row)
            if (!(in >> w)) throw std::runtime_error("knapsack: malformed weights line");
    inst.capacities.resize(m);
    for (auto& c : inst.capacities)
        if (!(in >> c)) throw std::runtime_error("knapsack: malformed capacities line");
    inst.validate();
    return inst;
}

inline KnapsackInstance load_knapsack(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open knapsack file: " + path);
    return parse_knapsack(in);
}

inline std::string serialize_knapsack(const KnapsackInstance& inst) {
    std::ostringstream out;
    out << inst.num_items() << ' ' << inst.num_constraints() << '\n';
    for (std::size_t j = 0; j < inst.num_items(); ++j)
        out << (j ? " " : "") << static_cast<long long>(inst.values[j]);
    out << '\n';
    for (const auto& row : inst.weights) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << static_cast<long long>(row[j]);
        out << '\n';
    }
    for (std::size_t i = 0; i < inst.num_constraints(); ++i)
        out << (i ? " " : "") << static_cast<long long>(inst.capacities[i]);
    out << '\n';
    return out.str();
}

// Random instance: values and weights uniform integers in [10, 100],
// capacity = half the row's total weight.
inline KnapsackInstance gen_random_knapsack(std::size_t n, std::size_t m, RngStream& rng) {
    if (n < 1 || m < 1) throw std::invalid_argument("gen_random_knapsack: need N >= 1 and m >= 1");
    KnapsackInstance inst;
    inst.values.resize(n);
    for (auto& v : inst.values) v = static_cast<double>(rng.uniform_int(10, 100));
    inst.weights.assign(m, std::vector<double>(n));
    inst.capacities.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double total = 0;
        for (auto& w : inst.weights[i]) {
            w = static_cast<double>(rng.uniform_int(10, 100));
            total += w;
        }
        inst.capacities[i] = std::floor(0.5 * total);
    }
    inst.validate();
    return inst;
}

// Feasible selections score the summed value; infeasible ones score the
// negated sum of constraint violations.
class Knapsack final : public Problem {
public:
    explicit Knapsack(KnapsackInstance inst) : inst_(std::move(inst)) { inst_.validate(); }

    double evaluate(std::span<const std::uint8_t> bits) const override {
        check_dimension(bits);
        double violation = 0;
        for (std::size_t i = 0; i < inst_.num_constraints(); ++i) {
            double load = 0;
            for (std::size_t j = 0; j < bits.size(); ++j)
                if (bits[j]) load += inst_.weights[i][j];
            if (load > inst_.capacities[i]) violation += load - inst_.capacities[i];
        }
        if (violation > 0) return -violation;
        double value = 0;
        for (std::size_t j = 0; j < bits.size(); ++j)
            if (bits[j]) value += inst_.values[j];
        return value;
    }
    std::size_t dimension() const override { return inst_.num_items(); }
    std::optional<double> optimum() const override { return inst_.optimum; }
    std::string name() const override { return "knapsack"; }
    const KnapsackInstance& instance() const { return inst_; }

private:
    KnapsackInstance inst_;
};

} // namespace neda
