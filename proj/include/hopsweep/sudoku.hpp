#pragma once

// Sudoku as a QUBO: one binary variable per (row, column, digit), four
// families of exactly-one constraints turned into quadratic penalties, and
// clamping of the clues into a reduced model over the free variables.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopsweep/mps.hpp"
#include "hopsweep/qubo.hpp"
#include "hopsweep/rng.hpp"

namespace hopsweep::sudoku {

struct Board {
    std::size_t n = 3;         ///< block size; the grid is n^2 x n^2
    std::vector<int> cells;    ///< row-major, 0 = empty, else 1..n^2

    Board() = default;
    explicit Board(std::size_t block) : n(block), cells(block * block * block * block, 0) {
        if (block < 2) throw std::invalid_argument("Sudoku block size must be at least 2");
    }

    std::size_t side() const { return n * n; }
    int at(std::size_t r, std::size_t c) const { return cells.at(r * side() + c); }
    int& at(std::size_t r, std::size_t c) { return cells.at(r * side() + c); }
    std::size_t clue_count() const {
        return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](int v) { return v != 0; }));
    }
    bool complete() const { return clue_count() == cells.size(); }
    bool operator==(const Board&) const = default;
};

class BoardFormatError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Board text: n^4 symbols with 0 or '.' for empty (16 or 81 characters,
/// whitespace ignored), or for any n a comma-separated list of n^4 integers.
inline Board parse_board(const std::string& text) {
    std::vector<int> values;
    if (text.find(',') != std::string::npos) {
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok.erase(std::remove_if(tok.begin(), tok.end(), [](unsigned char c) { return std::isspace(c); }), tok.end());
            if (tok == "." || tok.empty()) {
                if (tok.empty() && ss.eof()) break;
                values.push_back(0);
                continue;
            }
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(tok, &used);
            } catch (const std::exception&) {
                throw BoardFormatError("bad board symbol '" + tok + "'");
            }
            if (used != tok.size() || v < 0) throw BoardFormatError("bad board symbol '" + tok + "'");
            values.push_back(v);
        }
    } else {
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            if (c == '.' || c == '0')
                values.push_back(0);
            else if (c >= '1' && c <= '9')
                values.push_back(c - '0');
            else
                throw BoardFormatError(std::string("bad board symbol '") + c + "'");
        }
    }
    std::size_t n = 0;
    for (std::size_t b = 2; b * b * b * b <= values.size(); ++b)
        if (b * b * b * b == values.size()) n = b;
    if (n == 0) throw BoardFormatError("board needs n^4 entries, got " + std::to_string(values.size()));
    Board board(n);
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] > static_cast<int>(board.side()))
            throw BoardFormatError("entry " + std::to_string(values[k]) + " out of range at position " +
                                   std::to_string(k));
        board.cells[k] = values[k];
    }
    return board;
}

/// Compact text form: digits with '.' for blanks when n <= 3, else comma-separated.
inline std::string format_board(const Board& b) {
    std::string s;
    for (std::size_t k = 0; k < b.cells.size(); ++k) {
        if (b.n <= 3) {
            s += b.cells[k] == 0 ? '.' : static_cast<char>('0' + b.cells[k]);
        } else {
            if (k > 0) s += ',';
            s += std::to_string(b.cells[k]);
        }
    }
    return s;
}

/// Grid drawing with block rules; cells given in `clues` are bracketed.
inline std::string pretty(const Board& b, const Board* clues = nullptr) {
    const std::size_t side = b.side();
    const std::size_t w = side >= 10 ? 2 : 1;
    std::string out;
    auto rule = [&] {
        for (std::size_t c = 0; c < side; ++c) {
            if (c % b.n == 0) out += "+";
            out += std::string(w + 2, '-');
        }
        out += "+\n";
    };
    for (std::size_t r = 0; r < side; ++r) {
        if (r % b.n == 0) rule();
        for (std::size_t c = 0; c < side; ++c) {
            if (c % b.n == 0) out += "|";
            const int v = b.at(r, c);
            std::string d = v == 0 ? std::string(w, '.') : std::to_string(v);
            d.insert(0, w - d.size(), ' ');
            const bool given = clues != nullptr && clues->at(r, c) != 0;
            out += (given ? "[" : " ") + d + (given ? "]" : " ");
        }
        out += "|\n";
    }
    rule();
    return out;
}

/// How the off-diagonal coupling of two variables sharing more than one
/// constraint is formed: `unit` sets every constrained pair's matrix element
/// to 1, `accumulate` sums the penalty expansion exactly.
enum class PairCoupling { unit, accumulate };

inline std::size_t var_index(std::size_t side, std::size_t r, std::size_t c, std::size_t d) {
    return (r * side + c) * side + d;
}

struct Triple {
    std::size_t row, col, digit;  ///< 0-based; digit d means the value d + 1
    bool operator==(const Triple&) const = default;
};

inline Triple triple_of(std::size_t side, std::size_t v) { return {v / (side * side), (v / side) % side, v % side}; }

/// Every exactly-one constraint as its list of variable indices: cells, then
/// rows, columns and blocks (each per digit).
inline std::vector<std::vector<std::size_t>> constraint_groups(std::size_t n) {
    const std::size_t side = n * n;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            groups.emplace_back();
            for (std::size_t d = 0; d < side; ++d) groups.back().push_back(var_index(side, r, c, d));
        }
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t d = 0; d < side; ++d) {
            groups.emplace_back();
            for (std::size_t c = 0; c < side; ++c) groups.back().push_back(var_index(side, r, c, d));
        }
    for (std::size_t c = 0; c < side; ++c)
        for (std::size_t d = 0; d < side; ++d) {
            groups.emplace_back();
            for (std::size_t r = 0; r < side; ++r) groups.back().push_back(var_index(side, r, c, d));
        }
    for (std::size_t br = 0; br < n; ++br)
        for (std::size_t bc = 0; bc < n; ++bc)
            for (std::size_t d = 0; d < side; ++d) {
                groups.emplace_back();
                for (std::size_t r = br * n; r < br * n + n; ++r)
                    for (std::size_t c = bc * n; c < bc * n + n; ++c) groups.back().push_back(var_index(side, r, c, d));
            }
    return groups;
}

/// Sum of (sum_group z - 1)^2 with z^2 = z: offset 4 n^4, diagonal -4 and
/// unit pair elements per shared constraint.
inline QuboModel full_qubo(std::size_t n, PairCoupling mode = PairCoupling::unit) {
    if (n < 2) throw std::invalid_argument("Sudoku block size must be at least 2");
    const std::size_t side = n * n;
    const auto groups = constraint_groups(n);
    QuboModel q(side * side * side, static_cast<double>(groups.size()));
    for (const auto& g : groups) {
        for (std::size_t a = 0; a < g.size(); ++a) {
            q.add(g[a], g[a], -1.0);
            for (std::size_t b = a + 1; b < g.size(); ++b) {
                if (mode == PairCoupling::accumulate)
                    q.add(g[a], g[b], 1.0);
                else
                    q.set(g[a], g[b], 1.0);
            }
        }
    }
    return q;
}

/// Penalty P1 + P2 + P3 + P4 evaluated directly from the constraint groups.
inline double penalty(std::size_t n, const std::vector<std::uint8_t>& z) {
    double p = 0.0;
    for (const auto& g : constraint_groups(n)) {
        double s = -1.0;
        for (std::size_t v : g) s += z.at(v);
        p += s * s;
    }
    return p;
}

inline std::vector<std::uint8_t> indicator(const Board& b) {
    const std::size_t side = b.side();
    std::vector<std::uint8_t> z(side * side * side, 0);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c)
            if (b.at(r, c) != 0) z[var_index(side, r, c, static_cast<std::size_t>(b.at(r, c) - 1))] = 1;
    return z;
}

struct ClampMap {
    std::size_t n = 3;
    std::vector<std::size_t> free_vars;  ///< reduced index -> full variable index
    std::vector<std::size_t> fixed_one;  ///< full indices clamped to 1
    double c2 = 0.0;                     ///< z_fixed^T Q z_fixed

    std::size_t free_count() const { return free_vars.size(); }
    Triple triple(std::size_t free_index) const { return triple_of(n * n, free_vars.at(free_index)); }
};

class ClueConflict : public std::invalid_argument {
public:
    ClueConflict(const std::string& what, std::pair<std::size_t, std::size_t> a, std::pair<std::size_t, std::size_t> b)
        : std::invalid_argument(what), first(a), second(b) {}
    std::pair<std::size_t, std::size_t> first, second;  ///< 0-based (row, column)
};

/// Two clues sharing a digit in a row, column or block.
inline void check_clues(const Board& b) {
    const std::size_t side = b.side();
    auto cell_name = [](std::size_t r, std::size_t c) {
        return "r" + std::to_string(r + 1) + "c" + std::to_string(c + 1);
    };
    for (std::size_t r1 = 0; r1 < side; ++r1)
        for (std::size_t c1 = 0; c1 < side; ++c1) {
            const int v = b.at(r1, c1);
            if (v == 0) continue;
            for (std::size_t r2 = 0; r2 < side; ++r2)
                for (std::size_t c2 = 0; c2 < side; ++c2) {
                    if (r2 * side + c2 <= r1 * side + c1 || b.at(r2, c2) != v) continue;
                    const bool same_block = r1 / b.n == r2 / b.n && c1 / b.n == c2 / b.n;
                    if (r1 == r2 || c1 == c2 || same_block) {
                        const char* unit = r1 == r2 ? "row" : c1 == c2 ? "column" : "block";
                        throw ClueConflict("clue " + std::to_string(v) + " repeated in a " + unit + ": " +
                                               cell_name(r1, c1) + " and " + cell_name(r2, c2),
                                           {r1, c1}, {r2, c2});
                    }
                }
        }
}

/// Fix the clue variables to one and everything they exclude to zero, then
/// restrict the full model to the free variables. Linear terms from the
/// fixed-to-one variables are folded into the diagonal (x^2 = x) and the
/// fixed quadratic residue becomes part of the offset.
inline std::pair<QuboModel, ClampMap> clamp(const Board& board, const QuboModel& full) {
    const std::size_t side = board.side();
    if (full.size() != side * side * side) throw std::invalid_argument("clamp: QUBO size does not match board");
    check_clues(board);

    enum : std::uint8_t { free_var, zero, one };
    std::vector<std::uint8_t> state(full.size(), free_var);
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            if (board.at(r, c) == 0) continue;
            const auto d = static_cast<std::size_t>(board.at(r, c) - 1);
            for (std::size_t k = 0; k < side; ++k) {
                state[var_index(side, r, c, k)] = zero;  // same cell, other digits
                state[var_index(side, r, k, d)] = zero;  // same row
                state[var_index(side, k, c, d)] = zero;  // same column
            }
            const std::size_t br = r / board.n * board.n, bc = c / board.n * board.n;
            for (std::size_t rr = br; rr < br + board.n; ++rr)
                for (std::size_t cc = bc; cc < bc + board.n; ++cc) state[var_index(side, rr, cc, d)] = zero;
        }
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c)
            if (board.at(r, c) != 0) state[var_index(side, r, c, static_cast<std::size_t>(board.at(r, c) - 1))] = one;

    ClampMap map;
    map.n = board.n;
    std::vector<std::size_t> reduced_of(full.size(), SIZE_MAX);
    for (std::size_t v = 0; v < full.size(); ++v) {
        if (state[v] == free_var) {
            reduced_of[v] = map.free_vars.size();
            map.free_vars.push_back(v);
        } else if (state[v] == one) {
            map.fixed_one.push_back(v);
        }
    }

    QuboModel reduced(map.free_vars.size(), full.offset());
    for (const auto& [ij, q] : full.entries()) {
        const auto [i, j] = ij;
        const bool fi = state[i] == free_var, fj = state[j] == free_var;
        const bool oi = state[i] == one, oj = state[j] == one;
        if (fi && fj) {
            reduced.add(reduced_of[i], reduced_of[j], q);
        } else if (fi && oj) {
            reduced.add(reduced_of[i], reduced_of[i], 2.0 * q);
        } else if (oi && fj) {
            reduced.add(reduced_of[j], reduced_of[j], 2.0 * q);
        } else if (oi && oj) {
            map.c2 += i == j ? q : 2.0 * q;
        }
    }
    reduced.add_offset(map.c2);
    return {std::move(reduced), std::move(map)};
}

/// Full variable vector from a reduced assignment.
inline std::vector<std::uint8_t> expand(const ClampMap& map, const std::vector<std::uint8_t>& x) {
    if (x.size() != map.free_count()) throw std::invalid_argument("expand: assignment length mismatch");
    const std::size_t side = map.n * map.n;
    std::vector<std::uint8_t> z(side * side * side, 0);
    for (std::size_t v : map.fixed_one) z[v] = 1;
    for (std::size_t k = 0; k < x.size(); ++k) z[map.free_vars[k]] = x[k];
    return z;
}

struct CellIssue {
    std::size_t row, col;     ///< 0-based
    std::vector<int> digits;  ///< asserted digits: empty or more than one
};

struct DecodeResult {
    Board board;
    std::vector<CellIssue> issues;
    bool well_formed() const { return issues.empty(); }
};

/// Spin up means the variable is 1. Cells with zero or several asserted
/// digits are left empty and reported.
inline DecodeResult decode(const SpinConfiguration& config, const ClampMap& map, const Board& clues) {
    if (config.size() != map.free_count()) throw std::invalid_argument("decode: configuration length mismatch");
    const std::size_t side = clues.side();
    std::vector<std::uint8_t> z = expand(map, config.to_binary());
    DecodeResult out{clues, {}};
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            std::vector<int> digits;
            for (std::size_t d = 0; d < side; ++d)
                if (z[var_index(side, r, c, d)]) digits.push_back(static_cast<int>(d + 1));
            if (digits.size() == 1)
                out.board.at(r, c) = digits[0];
            else {
                out.board.at(r, c) = 0;
                out.issues.push_back({r, c, digits});
            }
        }
    return out;
}

struct Verdict {
    bool valid = true;
    std::vector<std::string> violations;
};

inline Verdict verify(const Board& b) {
    if (!b.complete()) throw std::invalid_argument("verify: board is incomplete");
    const std::size_t side = b.side();
    Verdict v;
    auto check = [&](const std::string& name, const std::vector<int>& values) {
        std::vector<int> seen(side + 1, 0);
        for (int x : values) ++seen[static_cast<std::size_t>(x)];
        for (std::size_t d = 1; d <= side; ++d)
            if (seen[d] != 1) {
                v.valid = false;
                v.violations.push_back(name + ": digit " + std::to_string(d) + " appears " + std::to_string(seen[d]) +
                                       " times");
            }
    };
    for (std::size_t r = 0; r < side; ++r) {
        std::vector<int> vals;
        for (std::size_t c = 0; c < side; ++c) vals.push_back(b.at(r, c));
        check("row " + std::to_string(r + 1), vals);
    }
    for (std::size_t c = 0; c < side; ++c) {
        std::vector<int> vals;
        for (std::size_t r = 0; r < side; ++r) vals.push_back(b.at(r, c));
        check("column " + std::to_string(c + 1), vals);
    }
    for (std::size_t br = 0; br < b.n; ++br)
        for (std::size_t bc = 0; bc < b.n; ++bc) {
            std::vector<int> vals;
            for (std::size_t r = br * b.n; r < br * b.n + b.n; ++r)
                for (std::size_t c = bc * b.n; c < bc * b.n + b.n; ++c) vals.push_back(b.at(r, c));
            check("block " + std::to_string(br * b.n + bc + 1), vals);
        }
    return v;
}

struct Puzzle {
    Board puzzle;
    Board solution;
};

/// A random valid grid (a relabeled and permuted pattern solution) with all
/// but `clues` cells erased at random.
inline Puzzle generate_puzzle(std::size_t n, std::size_t clues, std::uint64_t seed) {
    Board sol(n);
    const std::size_t side = sol.side();
    if (clues > side * side) throw std::invalid_argument("more clues than cells");
    Rng rng = Rng::stream(seed, StreamPurpose::test_data);
    auto shuffle = [&](std::vector<std::size_t>& v) {
        for (std::size_t k = v.size(); k > 1; --k) std::swap(v[k - 1], v[rng.below(k)]);
    };
    auto grouped_order = [&] {
        std::vector<std::size_t> groups(n), order;
        std::iota(groups.begin(), groups.end(), 0);
        shuffle(groups);
        for (std::size_t g : groups) {
            std::vector<std::size_t> inner(n);
            std::iota(inner.begin(), inner.end(), 0);
            shuffle(inner);
            for (std::size_t i : inner) order.push_back(g * n + i);
        }
        return order;
    };
    std::vector<std::size_t> digits(side);
    std::iota(digits.begin(), digits.end(), 0);
    shuffle(digits);
    const auto rows = grouped_order(), cols = grouped_order();
    const bool transpose = rng.below(2) == 1;
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            const std::size_t rr = rows[r], cc = cols[c];
            const std::size_t base = (rr * n + rr / n + cc) % side;
            sol.at(transpose ? c : r, transpose ? r : c) = static_cast<int>(digits[base] + 1);
        }
    std::vector<std::size_t> cells(side * side);
    std::iota(cells.begin(), cells.end(), 0);
    shuffle(cells);
    Board puz = sol;
    for (std::size_t k = clues; k < cells.size(); ++k) puz.cells[cells[k]] = 0;
    return {puz, sol};
}

}  // namespace hopsweep::sudoku
