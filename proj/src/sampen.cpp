#include "msb/sampen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msb::feat {

namespace {

constexpr std::size_t kDirectLimit = 2048;  // below this, plain double loop
constexpr std::size_t kLeafSize = 16;

inline bool within(double a, double b, double r) { return std::fabs(a - b) <= r; }

SampEnCounts counts_direct(const double* x, std::size_t n, int m, double r) {
    const std::size_t nt = n - static_cast<std::size_t>(m);
    SampEnCounts c;
    c.templates = nt;
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        for (std::size_t j = i + 1; j < nt; ++j) {
            bool match = true;
            for (int k = 0; k < m; ++k) {
                if (!within(x[i + static_cast<std::size_t>(k)],
                            x[j + static_cast<std::size_t>(k)], r)) {
                    match = false;
                    break;
                }
            }
            if (!match) continue;
            ++c.b;
            if (within(x[i + static_cast<std::size_t>(m)], x[j + static_cast<std::size_t>(m)], r))
                ++c.a;
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Large-signal path: deduplicate identical templates (quantized sensor data
// repeats heavily), then count weighted pairs with a k-d tree whose node
// tests use the same |a-b| <= r predicate as the direct loop, so counts are
// identical. Per-dimension match regions are intervals because IEEE rounding
// is monotone, which makes the corner tests below exact.
// ---------------------------------------------------------------------------

struct WeightedPoints {
    std::vector<double> coords;         // D x dims, row-major
    std::vector<std::uint64_t> weight;  // multiplicity of each unique template
    std::size_t dims = 0;
    std::size_t size() const { return weight.size(); }
    const double* row(std::size_t i) const { return coords.data() + i * dims; }
};

WeightedPoints dedup_templates(const double* x, std::size_t nt, std::size_t dims) {
    std::vector<std::uint32_t> order(nt);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        for (std::size_t d = 0; d < dims; ++d) {
            if (x[a + d] < x[b + d]) return true;
            if (x[a + d] > x[b + d]) return false;
        }
        return false;
    });
    WeightedPoints pts;
    pts.dims = dims;
    auto equal_rows = [&](std::uint32_t a, std::uint32_t b) {
        for (std::size_t d = 0; d < dims; ++d)
            if (x[a + d] != x[b + d]) return false;
        return true;
    };
    for (std::size_t i = 0; i < nt;) {
        std::size_t j = i + 1;
        while (j < nt && equal_rows(order[i], order[j])) ++j;
        for (std::size_t d = 0; d < dims; ++d) pts.coords.push_back(x[order[i] + d]);
        pts.weight.push_back(j - i);
        i = j;
    }
    return pts;
}

struct KdNode {
    std::vector<double> lo, hi;  // bounding box
    std::uint64_t weight = 0;
    std::uint32_t begin = 0, end = 0;  // leaf range into point order
    std::int32_t left = -1, right = -1;
};

class KdTree {
public:
    explicit KdTree(const WeightedPoints& pts) : pts_(pts), order_(pts.size()) {
        std::iota(order_.begin(), order_.end(), 0u);
        if (!pts_.weight.empty()) build(0, static_cast<std::uint32_t>(pts_.size()));
    }

    // Weighted count of points within r of q in every dim < dmax.
    std::uint64_t box_count(const double* q, std::size_t dmax, double r) const {
        if (nodes_.empty()) return 0;
        return count_rec(0, q, dmax, r);
    }

private:
    std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
        KdNode node;
        node.begin = begin;
        node.end = end;
        const std::size_t dims = pts_.dims;
        node.lo.assign(dims, std::numeric_limits<double>::infinity());
        node.hi.assign(dims, -std::numeric_limits<double>::infinity());
        for (std::uint32_t i = begin; i < end; ++i) {
            const double* p = pts_.row(order_[i]);
            node.weight += pts_.weight[order_[i]];
            for (std::size_t d = 0; d < dims; ++d) {
                node.lo[d] = std::min(node.lo[d], p[d]);
                node.hi[d] = std::max(node.hi[d], p[d]);
            }
        }
        const auto idx = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(std::move(node));
        if (end - begin > kLeafSize) {
            // Split the widest dimension at the median.
            std::size_t dim = 0;
            double width = -1.0;
            for (std::size_t d = 0; d < dims; ++d) {
                const double w = nodes_[idx].hi[d] - nodes_[idx].lo[d];
                if (w > width) {
                    width = w;
                    dim = d;
                }
            }
            if (width > 0.0) {
                const std::uint32_t mid = begin + (end - begin) / 2;
                std::nth_element(order_.begin() + begin, order_.begin() + mid,
                                 order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                                     return pts_.row(a)[dim] < pts_.row(b)[dim];
                                 });
                const std::uint32_t l = build(begin, mid);
                const std::uint32_t r = build(mid, end);
                nodes_[idx].left = static_cast<std::int32_t>(l);
                nodes_[idx].right = static_cast<std::int32_t>(r);
            }
        }
        return idx;
    }

    std::uint64_t count_rec(std::uint32_t ni, const double* q, std::size_t dmax, double r) const {
        const KdNode& node = nodes_[ni];
        bool contained = true;
        for (std::size_t d = 0; d < dmax; ++d) {
            // Entirely below or above the match interval in this dimension.
            if (node.hi[d] < q[d] && !within(node.hi[d], q[d], r)) return 0;
            if (node.lo[d] > q[d] && !within(node.lo[d], q[d], r)) return 0;
            if (contained && !(within(node.lo[d], q[d], r) && within(node.hi[d], q[d], r)))
                contained = false;
        }
        if (contained) return node.weight;
        if (node.left >= 0) {
            return count_rec(static_cast<std::uint32_t>(node.left), q, dmax, r) +
                   count_rec(static_cast<std::uint32_t>(node.right), q, dmax, r);
        }
        std::uint64_t total = 0;
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const double* p = pts_.row(order_[i]);
            bool match = true;
            for (std::size_t d = 0; d < dmax; ++d) {
                if (!within(p[d], q[d], r)) {
                    match = false;
                    break;
                }
            }
            if (match) total += pts_.weight[order_[i]];
        }
        return total;
    }

    const WeightedPoints& pts_;
    std::vector<std::uint32_t> order_;
    std::vector<KdNode> nodes_;
};

std::uint64_t weighted_pairs_direct(const WeightedPoints& pts, std::size_t dmax, double r) {
    // Ordered pairs including self-pairs.
    std::uint64_t total = 0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = pts.row(i);
        total += pts.weight[i] * pts.weight[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* b = pts.row(j);
            bool match = true;
            for (std::size_t d = 0; d < dmax; ++d) {
                if (!within(a[d], b[d], r)) {
                    match = false;
                    break;
                }
            }
            if (match) total += 2 * pts.weight[i] * pts.weight[j];
        }
    }
    return total;
}

SampEnCounts counts_dedup(const double* x, std::size_t n, int m, double r) {
    const std::size_t dims = static_cast<std::size_t>(m) + 1;
    const std::size_t nt = n - static_cast<std::size_t>(m);
    const WeightedPoints pts = dedup_templates(x, nt, dims);

    std::uint64_t ordered_b = 0, ordered_a = 0;
    if (pts.size() <= kDirectLimit) {
        ordered_b = weighted_pairs_direct(pts, dims - 1, r);
        ordered_a = weighted_pairs_direct(pts, dims, r);
    } else {
        const KdTree tree(pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double* q = pts.row(i);
            ordered_b += pts.weight[i] * tree.box_count(q, dims - 1, r);
            ordered_a += pts.weight[i] * tree.box_count(q, dims, r);
        }
    }
    SampEnCounts c;
    c.templates = nt;
    // Every template matches itself at both lengths; remove the diagonal and
    // halve to get unordered pairs.
    c.b = (ordered_b - nt) / 2;
    c.a = (ordered_a - nt) / 2;
    return c;
}

// ---------------------------------------------------------------------------
// m = 2 fast path for quantized signals: values map onto a small sorted
// alphabet, the per-dimension |a - b| <= r predicate becomes an index
// interval (rounding is monotone, so the match region per centre value is
// contiguous), and pair counting reduces to a sliding window over the first
// coordinate with Fenwick trees over the other two.
// ---------------------------------------------------------------------------

constexpr std::size_t kMaxAlphabet = 8192;

class Fenwick1 {
public:
    explicit Fenwick1(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i, std::int64_t delta) {
        for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }
    std::uint64_t prefix(std::size_t count) const {  // sum of first `count` slots
        std::uint64_t s = 0;
        for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }
    std::uint64_t range(std::size_t lo, std::size_t hi) const {  // inclusive
        return prefix(hi + 1) - prefix(lo);
    }

private:
    std::vector<std::int64_t> tree_;
};

// Row-indexed Fenwick over dim b, each row a Fenwick over dim c.
class Fenwick2 {
public:
    Fenwick2(std::size_t nb, std::size_t nc) : nb_(nb), nc_(nc), tree_((nb + 1) * (nc + 1), 0) {}
    void add(std::size_t b, std::size_t c, std::int64_t delta) {
        for (std::size_t i = b + 1; i <= nb_; i += i & (~i + 1))
            for (std::size_t j = c + 1; j <= nc_; j += j & (~j + 1))
                tree_[i * (nc_ + 1) + j] += static_cast<std::int32_t>(delta);
    }
    std::uint64_t prefix(std::size_t bcount, std::size_t ccount) const {
        std::uint64_t s = 0;
        for (std::size_t i = bcount; i > 0; i -= i & (~i + 1))
            for (std::size_t j = ccount; j > 0; j -= j & (~j + 1))
                s += static_cast<std::uint32_t>(tree_[i * (nc_ + 1) + j]);
        return s;
    }
    std::uint64_t box(std::size_t blo, std::size_t bhi, std::size_t clo, std::size_t chi) const {
        return prefix(bhi + 1, chi + 1) - prefix(blo, chi + 1) - prefix(bhi + 1, clo) +
               prefix(blo, clo);
    }

private:
    std::size_t nb_, nc_;
    std::vector<std::int32_t> tree_;
};

// Offline weighted 3-D dominance counting by divide and conquer over the
// first coordinate with a Fenwick tree over the third. Used for the
// triple-length counts when the alphabet is too large for the dense
// two-level Fenwick.
class Dominance3 {
public:
    explicit Dominance3(std::size_t alphabet) : bit_(alphabet + 1, 0) {}

    void add_point(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint64_t w) {
        events_.push_back({a, b, c, w, SIZE_MAX, 0});
    }
    // Accumulates sign * (weight of points with a<=A, b<=B, c<=C) into slot.
    void add_query(std::uint32_t a, std::uint32_t b, std::uint32_t c, int sign,
                   std::size_t slot) {
        events_.push_back({a, b, c, 0, slot, static_cast<std::int8_t>(sign)});
    }

    std::vector<std::int64_t> solve(std::size_t n_slots) {
        out_.assign(n_slots, 0);
        std::stable_sort(events_.begin(), events_.end(), [](const Ev& x, const Ev& y) {
            if (x.a != y.a) return x.a < y.a;
            return x.is_point() && !y.is_point();  // points first at equal a
        });
        scratch_.resize(events_.size());
        rec(0, events_.size());
        return std::move(out_);
    }

private:
    struct Ev {
        std::uint32_t a, b, c;
        std::uint64_t w;
        std::size_t slot;  // SIZE_MAX for points
        std::int8_t sign;
        bool is_point() const { return slot == SIZE_MAX; }
    };

    void rec(std::size_t lo, std::size_t hi) {
        if (hi - lo <= 1) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        rec(lo, mid);
        rec(mid, hi);
        // Left points against right queries, two-pointer over b (both halves
        // are b-sorted after their recursive calls).
        std::size_t p = lo;
        std::vector<std::pair<std::uint32_t, std::uint64_t>> touched;
        for (std::size_t q = mid; q < hi; ++q) {
            if (events_[q].is_point()) continue;
            while (p < mid) {
                if (!events_[p].is_point() || events_[p].b <= events_[q].b) {
                    if (events_[p].is_point()) {
                        bit_add(events_[p].c, events_[p].w);
                        touched.emplace_back(events_[p].c, events_[p].w);
                    }
                    ++p;
                } else {
                    break;
                }
            }
            out_[events_[q].slot] +=
                events_[q].sign * static_cast<std::int64_t>(bit_prefix(events_[q].c + 1));
        }
        for (const auto& [c, w] : touched) bit_sub(c, w);
        // Merge halves by b to keep the invariant.
        std::merge(events_.begin() + static_cast<std::ptrdiff_t>(lo),
                   events_.begin() + static_cast<std::ptrdiff_t>(mid),
                   events_.begin() + static_cast<std::ptrdiff_t>(mid),
                   events_.begin() + static_cast<std::ptrdiff_t>(hi), scratch_.begin(),
                   [](const Ev& x, const Ev& y) { return x.b < y.b; });
        std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(hi - lo),
                  events_.begin() + static_cast<std::ptrdiff_t>(lo));
    }

    void bit_add(std::uint32_t c, std::uint64_t w) {
        for (std::size_t i = c + 1; i < bit_.size(); i += i & (~i + 1)) bit_[i] += w;
    }
    void bit_sub(std::uint32_t c, std::uint64_t w) {
        for (std::size_t i = c + 1; i < bit_.size(); i += i & (~i + 1)) bit_[i] -= w;
    }
    std::uint64_t bit_prefix(std::size_t count) const {
        std::uint64_t s = 0;
        for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += bit_[i];
        return s;
    }

    std::vector<Ev> events_;
    std::vector<Ev> scratch_;
    std::vector<std::uint64_t> bit_;
    std::vector<std::int64_t> out_;
};

SampEnCounts counts_grid_m2(const double* x, std::size_t n, double r) {
    const std::size_t nt = n - 2;
    // Value alphabet.
    std::vector<double> values(x, x + n);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const std::size_t v = values.size();
    if (v >= (1u << 21)) return counts_dedup(x, n, 2, r);  // exceeds key packing

    // Match interval per value index, using the exact scalar predicate. Both
    // endpoints are nondecreasing in the centre value (monotone rounding),
    // so two pointers suffice.
    std::vector<std::uint32_t> lo(v), hi(v);
    {
        std::size_t l = 0, h = 0;
        for (std::size_t i = 0; i < v; ++i) {
            while (!within(values[l], values[i], r)) ++l;  // stops at l <= i
            if (h < i) h = i;
            while (h + 1 < v && within(values[h + 1], values[i], r)) ++h;
            lo[i] = static_cast<std::uint32_t>(l);
            hi[i] = static_cast<std::uint32_t>(h);
        }
    }

    // Unique templates as packed integer triples.
    std::vector<std::uint32_t> ix(n);
    for (std::size_t i = 0; i < n; ++i)
        ix[i] = static_cast<std::uint32_t>(
            std::lower_bound(values.begin(), values.end(), x[i]) - values.begin());
    std::vector<std::uint64_t> keys(nt);
    for (std::size_t i = 0; i < nt; ++i)
        keys[i] = (static_cast<std::uint64_t>(ix[i]) << 42) |
                  (static_cast<std::uint64_t>(ix[i + 1]) << 21) |
                  static_cast<std::uint64_t>(ix[i + 2]);
    std::sort(keys.begin(), keys.end());
    std::vector<std::uint32_t> ta, tb, tc;
    std::vector<std::uint64_t> tw;
    for (std::size_t i = 0; i < nt;) {
        std::size_t j = i + 1;
        while (j < nt && keys[j] == keys[i]) ++j;
        ta.push_back(static_cast<std::uint32_t>(keys[i] >> 42));
        tb.push_back(static_cast<std::uint32_t>((keys[i] >> 21) & 0x1fffff));
        tc.push_back(static_cast<std::uint32_t>(keys[i] & 0x1fffff));
        tw.push_back(j - i);
        i = j;
    }
    const std::size_t d = tw.size();

    // Pair counts at length two: slide the a-window over the a-sorted
    // templates with a Fenwick tree over b (the templates are sorted by the
    // packed key, whose top bits are a).
    std::uint64_t ordered_b = 0, ordered_a = 0;
    const bool dense_bc = v <= kMaxAlphabet;
    {
        Fenwick1 bit_b(v);
        Fenwick2 bit_bc(dense_bc ? v : 0, dense_bc ? v : 0);
        std::size_t next_in = 0, next_out = 0;
        for (std::size_t q = 0; q < d; ++q) {
            const std::uint32_t alo = lo[ta[q]], ahi = hi[ta[q]];
            while (next_in < d && ta[next_in] <= ahi) {
                bit_b.add(tb[next_in], static_cast<std::int64_t>(tw[next_in]));
                if (dense_bc)
                    bit_bc.add(tb[next_in], tc[next_in], static_cast<std::int64_t>(tw[next_in]));
                ++next_in;
            }
            while (next_out < d && ta[next_out] < alo) {
                bit_b.add(tb[next_out], -static_cast<std::int64_t>(tw[next_out]));
                if (dense_bc)
                    bit_bc.add(tb[next_out], tc[next_out],
                               -static_cast<std::int64_t>(tw[next_out]));
                ++next_out;
            }
            ordered_b += tw[q] * bit_b.range(lo[tb[q]], hi[tb[q]]);
            if (dense_bc)
                ordered_a += tw[q] * bit_bc.box(lo[tb[q]], hi[tb[q]], lo[tc[q]], hi[tc[q]]);
        }
    }

    if (!dense_bc) {
        // Large alphabet: triple-length counts via offline dominance,
        // decomposing each box into signed corner prefixes.
        Dominance3 dom(v);
        for (std::size_t i = 0; i < d; ++i) dom.add_point(ta[i], tb[i], tc[i], tw[i]);
        for (std::size_t i = 0; i < d; ++i) {
            const std::uint32_t ahi = hi[ta[i]], bhi = hi[tb[i]], chi = hi[tc[i]];
            const bool has_alo = lo[ta[i]] > 0, has_blo = lo[tb[i]] > 0, has_clo = lo[tc[i]] > 0;
            const std::uint32_t alo1 = has_alo ? lo[ta[i]] - 1 : 0;
            const std::uint32_t blo1 = has_blo ? lo[tb[i]] - 1 : 0;
            const std::uint32_t clo1 = has_clo ? lo[tc[i]] - 1 : 0;
            dom.add_query(ahi, bhi, chi, +1, i);
            if (has_alo) dom.add_query(alo1, bhi, chi, -1, i);
            if (has_blo) dom.add_query(ahi, blo1, chi, -1, i);
            if (has_clo) dom.add_query(ahi, bhi, clo1, -1, i);
            if (has_alo && has_blo) dom.add_query(alo1, blo1, chi, +1, i);
            if (has_alo && has_clo) dom.add_query(alo1, bhi, clo1, +1, i);
            if (has_blo && has_clo) dom.add_query(ahi, blo1, clo1, +1, i);
            if (has_alo && has_blo && has_clo) dom.add_query(alo1, blo1, clo1, -1, i);
        }
        const auto box_counts = dom.solve(d);
        for (std::size_t i = 0; i < d; ++i)
            ordered_a += tw[i] * static_cast<std::uint64_t>(box_counts[i]);
    }

    SampEnCounts c;
    c.templates = nt;
    c.b = (ordered_b - nt) / 2;
    c.a = (ordered_a - nt) / 2;
    return c;
}

}  // namespace

SampEnCounts sampen_counts(const std::vector<double>& x, int m, double r) {
    if (m < 1) throw ArgumentError("sample entropy needs m >= 1");
    if (x.size() < static_cast<std::size_t>(m) + 2)
        throw ArgumentError("sample entropy needs at least m + 2 samples");
    if (!(r >= 0.0) || !std::isfinite(r))
        throw ArgumentError("sample entropy tolerance must be finite and non-negative");
    const std::size_t nt = x.size() - static_cast<std::size_t>(m);
    if (nt <= kDirectLimit) return counts_direct(x.data(), x.size(), m, r);
    if (m == 2) return counts_grid_m2(x.data(), x.size(), r);
    return counts_dedup(x.data(), x.size(), m, r);
}

double sampen_cap(std::uint64_t templates) {
    return std::log(static_cast<double>(templates) * static_cast<double>(templates - 1));
}

double sample_entropy(const std::vector<double>& x, int m, double r) {
    const SampEnCounts c = sampen_counts(x, m, r);
    if (c.a == 0 || c.b == 0) return sampen_cap(c.templates);
    return -std::log(static_cast<double>(c.a) / static_cast<double>(c.b));
}

}  // namespace msb::feat
