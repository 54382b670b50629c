#pragma once

#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "problem.hpp"

namespace neda {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    int line_number;
};

struct CnfFormula {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses; // literal = signed 1-based variable index

    bool operator==(const CnfFormula&) const = default;
};

// DIMACS CNF reader: `c` comment lines, one `p cnf V C` header, C clauses
// each terminated by 0. Clause and variable counts must match the header.
inline CnfFormula parse_dimacs(std::istream& in) {
    CnfFormula f;
    bool header_seen = false;
    std::size_t expected_clauses = 0;
    std::vector<int> current;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == 'c') continue;
        if (line[0] == 'p') {
            if (header_seen) throw ParseError("duplicate header", line_no);
            std::istringstream hs(line);
            std::string p, fmt;
            long vars = 0, clauses = 0;
            if (!(hs >> p >> fmt >> vars >> clauses) || fmt != "cnf" || vars < 0 || clauses < 0)
                throw ParseError("malformed header, expected 'p cnf V C'", line_no);
            f.num_vars = static_cast<int>(vars);
            expected_clauses = static_cast<std::size_t>(clauses);
            header_seen = true;
            continue;
        }
        if (line[0] == '%') break; // SATLIB-style trailer
        if (!header_seen) throw ParseError("clause before header", line_no);
        std::istringstream ls(line);
        int lit;
        while (ls >> lit) {
            if (lit == 0) {
                if (current.empty()) throw ParseError("empty clause", line_no);
                f.clauses.push_back(current);
                current.clear();
            } else {
                if (std::abs(lit) > f.num_vars) throw ParseError("literal out of range", line_no);
                current.push_back(lit);
            }
        }
        if (!ls.eof()) throw ParseError("bad literal token", line_no);
    }
    if (!header_seen) throw ParseError("missing header", line_no);
    if (!current.empty()) throw ParseError("unterminated clause", line_no);
    if (f.clauses.size() != expected_clauses)
        throw ParseError("clause count mismatch: header says " + std::to_string(expected_clauses) +
                             ", body has " + std::to_string(f.clauses.size()),
                         line_no);
    return f;
}

inline CnfFormula parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    return parse_dimacs(in);
}

inline CnfFormula load_dimacs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CNF file: " + path);
    return parse_dimacs(in);
}

inline std::string serialize_dimacs(const CnfFormula& f) {
    std::ostringstream out;
    out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    for (const auto& clause : f.clauses) {
        for (int lit : clause) out << lit << ' ';
        out << "0\n";
    }
    return out.str();
}

// MaxSat: count of satisfied clauses; bit i corresponds to variable i+1.
class MaxSat final : public Problem {
public:
    explicit MaxSat(CnfFormula formula) : formula_(std::move(formula)) {}

    double evaluate(std::span<const std::uint8_t> bits) const override {
        check_dimension(bits);
        std::size_t satisfied = 0;
        for (const auto& clause : formula_.clauses) {
            for (int lit : clause) {
                const bool value = bits[static_cast<std::size_t>(std::abs(lit)) - 1];
                if (value == (lit > 0)) { ++satisfied; break; }
            }
        }
        return static_cast<double>(satisfied);
    }
    std::size_t dimension() const override { return static_cast<std::size_t>(formula_.num_vars); }
    std::optional<double> optimum() const override {
        // phase-transition instances used here are all satisfiable
        return static_cast<double>(formula_.clauses.size());
    }
    std::string name() const override { return "maxsat"; }
    const CnfFormula& formula() const { return formula_; }

private:
    CnfFormula formula_;
};

} // namespace neda
