#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "genotype.hpp"
#include "rng.hpp"

namespace neda {

// Bayesian network over binary variables with at most two parents per node,
// learned greedily by edge addition under a BIC score and sampled
// ancestrally. Rebuilt from scratch from each generation's selected set.
class BoaNetwork {
public:
    static constexpr std::size_t kMaxParents = 2;

    // BIC contribution of one node given its parent set:
    // max log-likelihood of the node's CPT minus 0.5 * log(M) * 2^|parents|.
    static double node_score(const std::vector<Bits>& data, std::size_t node,
                             const std::vector<std::size_t>& parents) {
        const std::size_t configs = std::size_t{1} << parents.size();
        std::vector<std::size_t> count(configs * 2, 0);
        for (const auto& row : data) {
            std::size_t cfg = 0;
            for (std::size_t k = 0; k < parents.size(); ++k)
                if (row[parents[k]]) cfg |= (std::size_t{1} << k);
            ++count[cfg * 2 + (row[node] ? 1 : 0)];
        }
        double ll = 0;
        for (std::size_t cfg = 0; cfg < configs; ++cfg) {
            const double n0 = static_cast<double>(count[cfg * 2]);
            const double n1 = static_cast<double>(count[cfg * 2 + 1]);
            const double n = n0 + n1;
            if (n0 > 0) ll += n0 * std::log(n0 / n);
            if (n1 > 0) ll += n1 * std::log(n1 / n);
        }
        const double penalty = 0.5 * std::log(static_cast<double>(data.size())) *
                               static_cast<double>(configs);
        return ll - penalty;
    }

    static BoaNetwork learn(const std::vector<Bits>& data, std::size_t dim) {
        if (data.empty()) throw std::invalid_argument("BoaNetwork: empty data");
        BoaNetwork net;
        net.dim_ = dim;
        net.parents_.assign(dim, {});
        std::vector<double> score(dim);
        for (std::size_t v = 0; v < dim; ++v) score[v] = node_score(data, v, {});
        for (;;) {
            double best_gain = 0;
            std::size_t best_u = 0, best_v = 0;
            double best_new_score = 0;
            bool found = false;
            for (std::size_t u = 0; u < dim; ++u) {
                for (std::size_t v = 0; v < dim; ++v) {
                    if (u == v || net.parents_[v].size() >= kMaxParents) continue;
                    if (std::find(net.parents_[v].begin(), net.parents_[v].end(), u) !=
                        net.parents_[v].end())
                        continue;
                    if (net.reachable(v, u)) continue; // u -> v would close a cycle
                    auto trial = net.parents_[v];
                    trial.push_back(u);
                    std::sort(trial.begin(), trial.end());
                    const double s = node_score(data, v, trial);
                    const double gain = s - score[v];
                    if (gain > best_gain) { // strict: ties keep lowest (u, v)
                        best_gain = gain;
                        best_u = u;
                        best_v = v;
                        best_new_score = s;
                        found = true;
                    }
                }
            }
            if (!found) break;
            net.parents_[best_v].push_back(best_u);
            std::sort(net.parents_[best_v].begin(), net.parents_[best_v].end());
            score[best_v] = best_new_score;
        }
        net.fit_tables(data);
        net.topo_order();
        return net;
    }

    Bits sample(RngStream& rng) const {
        Bits x(dim_, 0);
        for (std::size_t v : order_) {
            std::size_t cfg = 0;
            const auto& pa = parents_[v];
            for (std::size_t k = 0; k < pa.size(); ++k)
                if (x[pa[k]]) cfg |= (std::size_t{1} << k);
            x[v] = rng.bernoulli(prob_one_[v][cfg]) ? 1 : 0;
        }
        return x;
    }

    const std::vector<std::vector<std::size_t>>& parents() const { return parents_; }
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& p : parents_) n += p.size();
        return n;
    }

private:
    // true if `to` is reachable from `from` along parent -> child edges
    bool reachable(std::size_t from, std::size_t to) const {
        if (from == to) return true;
        std::vector<bool> visited(dim_, false);
        std::vector<std::size_t> stack{from};
        visited[from] = true;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < dim_; ++v) {
                if (visited[v]) continue;
                if (std::find(parents_[v].begin(), parents_[v].end(), cur) != parents_[v].end()) {
                    if (v == to) return true;
                    visited[v] = true;
                    stack.push_back(v);
                }
            }
        }
        return false;
    }

    void fit_tables(const std::vector<Bits>& data) {
        prob_one_.assign(dim_, {});
        for (std::size_t v = 0; v < dim_; ++v) {
            const std::size_t configs = std::size_t{1} << parents_[v].size();
            std::vector<double> ones(configs, 0), total(configs, 0);
            for (const auto& row : data) {
                std::size_t cfg = 0;
                for (std::size_t k = 0; k < parents_[v].size(); ++k)
                    if (row[parents_[v][k]]) cfg |= (std::size_t{1} << k);
                total[cfg] += 1;
                if (row[v]) ones[cfg] += 1;
            }
            prob_one_[v].resize(configs);
            for (std::size_t cfg = 0; cfg < configs; ++cfg)
                prob_one_[v][cfg] = (ones[cfg] + 1.0) / (total[cfg] + 2.0); // Laplace
        }
    }

    void topo_order() {
        order_.clear();
        std::vector<std::size_t> remaining_parents(dim_);
        for (std::size_t v = 0; v < dim_; ++v) remaining_parents[v] = parents_[v].size();
        std::vector<std::size_t> ready;
        for (std::size_t v = 0; v < dim_; ++v)
            if (remaining_parents[v] == 0) ready.push_back(v);
        while (!ready.empty()) {
            const std::size_t v = ready.front();
            ready.erase(ready.begin());
            order_.push_back(v);
            for (std::size_t w = 0; w < dim_; ++w) {
                if (std::find(parents_[w].begin(), parents_[w].end(), v) != parents_[w].end()) {
                    if (--remaining_parents[w] == 0) ready.push_back(w);
                }
            }
        }
        if (order_.size() != dim_) throw std::logic_error("BoaNetwork: cycle in learned network");
    }

    std::size_t dim_ = 0;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<double>> prob_one_;
    std::vector<std::size_t> order_;
};

} // namespace neda
