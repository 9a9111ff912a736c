#include "flowcast/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flowcast {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return d2;
}

namespace {

// Search bookkeeping: (squared distance, index), worst candidate on top.
struct Candidate {
    double d2;
    std::size_t index;
};

inline bool better(const Candidate& a, const Candidate& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

inline bool heap_less(const Candidate& a, const Candidate& b) { return better(a, b); }

} // namespace

KdTree::KdTree(std::span<const double> coords, std::size_t dim)
    : coords_(coords.begin(), coords.end()), dim_(dim) {
    count_ = dim_ == 0 ? 0 : coords_.size() / dim_;
    points_.resize(count_);
    for (std::size_t i = 0; i < count_; ++i) points_[i] = i;
    if (count_ > 0) root_ = build(0, count_);
}

int KdTree::build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    // Split on the widest dimension of this subset; degenerate subsets (all
    // points identical) become oversized leaves.
    std::size_t split_dim = 0;
    double widest = -1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = begin; i < end; ++i) {
            const double v = coords_[points_[i] * dim_ + d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > widest) {
            widest = hi - lo;
            split_dim = d;
        }
    }
    if (!(widest > 0.0)) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                         const double va = coords_[a * dim_ + split_dim];
                         const double vb = coords_[b * dim_ + split_dim];
                         return va < vb || (va == vb && a < b);
                     });

    nodes_[id].split_dim = static_cast<int>(split_dim);
    nodes_[id].split_value = coords_[points_[mid] * dim_ + split_dim];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].child_left = left;
    nodes_[id].child_right = right;
    return id;
}

std::vector<KdTree::Hit> KdTree::query(std::span<const double> q, std::size_t kn) const {
    std::vector<Candidate> heap;
    if (count_ == 0 || kn == 0) return {};
    kn = std::min(kn, count_);
    heap.reserve(kn);

    auto consider = [&](std::size_t idx) {
        const Candidate c{squared_distance(point(idx), q), idx};
        if (heap.size() < kn) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end(), heap_less);
        } else if (better(c, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), heap_less);
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end(), heap_less);
        }
    };

    // Recursive descent; the far child is pruned only when the splitting
    // plane is strictly farther than the current worst candidate, so
    // equal-distance lower-index points are never lost.
    auto search = [&](auto&& self, int node_id) -> void {
        const Node& node = nodes_[node_id];
        if (node.child_left < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) consider(points_[i]);
            return;
        }
        const double diff = q[static_cast<std::size_t>(node.split_dim)] - node.split_value;
        const int near = diff < 0.0 ? node.child_left : node.child_right;
        const int far = diff < 0.0 ? node.child_right : node.child_left;
        self(self, near);
        if (heap.size() < kn || diff * diff <= heap.front().d2) self(self, far);
    };
    search(search, root_);

    std::sort(heap.begin(), heap.end(), better);
    std::vector<Hit> hits;
    hits.reserve(heap.size());
    for (const Candidate& c : heap) hits.push_back({c.index, std::sqrt(c.d2)});
    return hits;
}

std::vector<KdTree::Hit> brute_force_knn(std::span<const double> coords, std::size_t dim,
                                         std::span<const double> q, std::size_t kn) {
    if (dim == 0) return {};
    const std::size_t n = coords.size() / dim;
    if (n == 0 || kn == 0) return {};
    kn = std::min(kn, n);

    std::vector<Candidate> all(n);
    for (std::size_t i = 0; i < n; ++i)
        all[i] = {squared_distance(coords.subspan(i * dim, dim), q), i};
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(kn), all.end(),
                      better);
    std::vector<KdTree::Hit> hits;
    hits.reserve(kn);
    for (std::size_t i = 0; i < kn; ++i) hits.push_back({all[i].index, std::sqrt(all[i].d2)});
    return hits;
}

} // namespace flowcast
