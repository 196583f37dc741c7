#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "nonconf/error.hpp"

namespace nonconf {

inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 24;

/// Word budget, overridable through NONCONF_IFS_BUDGET.
inline std::uint64_t word_budget_from_env(std::uint64_t fallback = kDefaultWordBudget) {
    if (const char* env = std::getenv("NONCONF_IFS_BUDGET")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
        throw Error(ErrorKind::Config, std::string("NONCONF_IFS_BUDGET is not a positive integer: ") + env);
    }
    return fallback;
}

struct Word {
    std::vector<int> symbols;

    std::size_t size() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }
    int operator[](std::size_t i) const { return symbols[i]; }
    bool operator==(const Word&) const = default;

    std::string str() const {
        std::string s;
        for (int c : symbols) {
            if (!s.empty() && c > 9) s += '.';
            s += std::to_string(c);
        }
        return s;
    }
};

/// One period of a periodic symbol sequence.
struct PeriodicWord {
    Word word;

    std::size_t period() const { return word.size(); }
    /// Rotation by k: i_k i_{k+1} ... i_{k-1}.
    PeriodicWord rotated(std::size_t k) const {
        PeriodicWord out{word};
        std::rotate(out.word.symbols.begin(), out.word.symbols.begin() + static_cast<long>(k % period()),
                    out.word.symbols.end());
        return out;
    }
};

/// 0/1 Markov transition matrix: a(i, j) = 1 when symbol j may follow symbol i.
class TransitionMatrix {
public:
    TransitionMatrix() = default;

    explicit TransitionMatrix(std::vector<std::vector<int>> rows) {
        n_ = static_cast<int>(rows.size());
        if (n_ < 1) throw Error(ErrorKind::InvalidParameter, "transition matrix needs at least one symbol");
        entries_.assign(static_cast<std::size_t>(n_ * n_), 0);
        for (int i = 0; i < n_; ++i) {
            if (static_cast<int>(rows[i].size()) != n_)
                throw Error(ErrorKind::InvalidParameter, "transition matrix must be square");
            bool any = false;
            for (int j = 0; j < n_; ++j) {
                const int v = rows[i][j];
                if (v != 0 && v != 1) throw Error(ErrorKind::InvalidParameter, "transition entries must be 0 or 1");
                entries_[static_cast<std::size_t>(i * n_ + j)] = static_cast<std::uint8_t>(v);
                any = any || v == 1;
            }
            if (!any)
                throw Error(ErrorKind::InvalidParameter, "symbol " + std::to_string(i) + " has no successor");
        }
    }

    static TransitionMatrix full_shift(int n) {
        return TransitionMatrix(std::vector<std::vector<int>>(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 1)));
    }
    static TransitionMatrix golden_mean() { return TransitionMatrix({{1, 1}, {1, 0}}); }

    int size() const { return n_; }
    bool allowed(int i, int j) const { return entries_[static_cast<std::size_t>(i * n_ + j)] != 0; }
    bool is_full_shift() const {
        return std::all_of(entries_.begin(), entries_.end(), [](auto v) { return v == 1; });
    }

    bool admissible(const Word& w) const {
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (w[k] < 0 || w[k] >= n_) return false;
            if (k + 1 < w.size() && !allowed(w[k], w[k + 1])) return false;
        }
        return true;
    }
    bool cyclically_admissible(const PeriodicWord& w) const {
        return !w.word.empty() && admissible(w.word) && allowed(w.word.symbols.back(), w.word.symbols.front());
    }

    std::vector<std::vector<int>> rows() const {
        std::vector<std::vector<int>> out(static_cast<std::size_t>(n_), std::vector<int>(static_cast<std::size_t>(n_)));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) out[i][j] = allowed(i, j) ? 1 : 0;
        return out;
    }

    /// Transitive closure: reach(i, j) when a path of length >= 1 leads from i to j.
    std::vector<std::vector<bool>> reachability() const {
        std::vector<std::vector<bool>> r(static_cast<std::size_t>(n_), std::vector<bool>(static_cast<std::size_t>(n_)));
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r[i][j] = allowed(i, j);
        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < n_; ++i)
                if (r[i][k])
                    for (int j = 0; j < n_; ++j)
                        if (r[k][j]) r[i][j] = true;
        return r;
    }

    bool irreducible() const {
        const auto r = reachability();
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (!r[i][j]) return false;
        return true;
    }

private:
    int n_ = 0;
    std::vector<std::uint8_t> entries_;
};

namespace detail {

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t s = a + b;
    return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}
inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) return std::numeric_limits<std::uint64_t>::max();
    return out;
}

using CountMatrix = std::vector<std::vector<std::uint64_t>>;

inline CountMatrix matrix_power(const TransitionMatrix& a, int p) {
    const int n = a.size();
    CountMatrix result(static_cast<std::size_t>(n), std::vector<std::uint64_t>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) result[i][i] = 1;
    for (int step = 0; step < p; ++step) {
        CountMatrix next(static_cast<std::size_t>(n), std::vector<std::uint64_t>(static_cast<std::size_t>(n)));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (result[i][k] != 0)
                    for (int j = 0; j < n; ++j)
                        if (a.allowed(k, j)) next[i][j] = saturating_add(next[i][j], result[i][k]);
        result = std::move(next);
    }
    return result;
}

} // namespace detail

/// |Sigma_p| = sum of the entries of A^(p-1); saturates at UINT64_MAX.
inline std::uint64_t count_admissible(const TransitionMatrix& a, int p) {
    if (p < 1) throw Error(ErrorKind::InvalidParameter, "word length must be >= 1");
    const auto m = detail::matrix_power(a, p - 1);
    std::uint64_t total = 0;
    for (const auto& row : m)
        for (auto v : row) total = detail::saturating_add(total, v);
    return total;
}

/// |Fix(sigma^p)| = trace(A^p); saturates at UINT64_MAX.
inline std::uint64_t count_periodic(const TransitionMatrix& a, int p) {
    if (p < 1) throw Error(ErrorKind::InvalidParameter, "period must be >= 1");
    const auto m = detail::matrix_power(a, p);
    std::uint64_t total = 0;
    for (int i = 0; i < a.size(); ++i) total = detail::saturating_add(total, m[i][i]);
    return total;
}

namespace detail {

/// Depth-first lexicographic enumeration; `cyclic` also requires last -> first.
template <class Visit>
void enumerate_words(const TransitionMatrix& a, int p, bool cyclic, Visit&& visit) {
    const int n = a.size();
    std::vector<int> word(static_cast<std::size_t>(p), 0);
    // next candidate symbol at each depth
    std::vector<int> cursor(static_cast<std::size_t>(p), 0);
    int depth = 0;
    while (depth >= 0) {
        if (cursor[depth] >= n) {
            cursor[depth] = 0;
            --depth;
            if (depth >= 0) ++cursor[depth];
            continue;
        }
        const int sym = cursor[depth];
        if (depth > 0 && !a.allowed(word[depth - 1], sym)) {
            ++cursor[depth];
            continue;
        }
        word[depth] = sym;
        if (depth == p - 1) {
            if (!cyclic || a.allowed(sym, word[0])) visit(word);
            ++cursor[depth];
        } else {
            ++depth;
        }
    }
}

inline void check_budget(std::uint64_t count, std::uint64_t budget, const char* what) {
    if (count > budget)
        throw Error(ErrorKind::BudgetExceeded, std::string(what) + ": " + std::to_string(count) +
                                                   " words exceed budget " + std::to_string(budget));
}

} // namespace detail

/// Sigma_p in lexicographic order.
inline std::vector<Word> admissible_words(const TransitionMatrix& a, int p,
                                          std::uint64_t budget = kDefaultWordBudget) {
    const std::uint64_t count = count_admissible(a, p);
    detail::check_budget(count, budget, "admissible_words");
    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(count));
    detail::enumerate_words(a, p, false, [&](const std::vector<int>& w) { out.push_back(Word{w}); });
    return out;
}

/// Fix(sigma^p): one period of every cyclically admissible word, lexicographic.
inline std::vector<PeriodicWord> periodic_words(const TransitionMatrix& a, int p,
                                                std::uint64_t budget = kDefaultWordBudget) {
    const std::uint64_t count = count_periodic(a, p);
    detail::check_budget(count, budget, "periodic_words");
    std::vector<PeriodicWord> out;
    out.reserve(static_cast<std::size_t>(count));
    detail::enumerate_words(a, p, true, [&](const std::vector<int>& w) { out.push_back(PeriodicWord{Word{w}}); });
    return out;
}

/// Perron root of A. Each irreducible block is handled separately with the
/// aperiodic shift A + I and Collatz-Wielandt bounds; the maximum is returned.
inline double spectral_radius(const TransitionMatrix& a, double tol = 1e-12) {
    const int n = a.size();
    const auto reach = a.reachability();
    std::vector<int> component(static_cast<std::size_t>(n), -1);
    double best = 0.0;
    for (int seed = 0; seed < n; ++seed) {
        if (component[seed] >= 0) continue;
        std::vector<int> members;
        for (int j = 0; j < n; ++j)
            if (j == seed || (reach[seed][j] && reach[j][seed])) {
                component[j] = seed;
                members.push_back(j);
            }
        const std::size_t m = members.size();
        std::vector<double> x(m, 1.0), y(m);
        double lo = 0.0, hi = 0.0;
        for (int iter = 0; iter < 100000; ++iter) {
            lo = std::numeric_limits<double>::infinity();
            hi = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                double acc = x[i];
                for (std::size_t j = 0; j < m; ++j)
                    if (a.allowed(members[i], members[j])) acc += x[j];
                y[i] = acc;
                lo = std::min(lo, acc / x[i]);
                hi = std::max(hi, acc / x[i]);
            }
            const double norm = *std::max_element(y.begin(), y.end());
            for (std::size_t i = 0; i < m; ++i) x[i] = y[i] / norm;
            if (hi - lo <= tol * hi) break;
        }
        best = std::max(best, 0.5 * (lo + hi) - 1.0);
    }
    return best;
}

} // namespace nonconf
