#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flowcast {

// Exact k-nearest-neighbour index over a fixed point set (bucketed kd-tree,
// median split on the widest dimension). Queries return precisely what an
// exhaustive scan would: sorted by distance, distance ties broken by lowest
// point index. Comparisons are done on squared distances, so the tie order is
// bit-deterministic.
class KdTree {
public:
    struct Hit {
        std::size_t index;
        double distance;
    };

    KdTree() = default;
    // `coords` is row-major, `dim` doubles per point; the data is copied.
    KdTree(std::span<const double> coords, std::size_t dim);

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return count_ == 0; }

    // The kn nearest points to q. kn is clamped to size().
    std::vector<Hit> query(std::span<const double> q, std::size_t kn) const;

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }

private:
    struct Node {
        // Leaf when child_left < 0: points_[begin, end) holds the bucket.
        int child_left = -1;
        int child_right = -1;
        int split_dim = 0;
        double split_value = 0.0;
        std::size_t begin = 0;
        std::size_t end = 0;
    };

    int build(std::size_t begin, std::size_t end);

    std::vector<double> coords_;
    std::size_t dim_ = 0;
    std::size_t count_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::size_t> points_; // permutation of point indices, bucketed by leaf
    int root_ = -1;

    static constexpr std::size_t kLeafSize = 16;
};

// Reference implementation used as the oracle for KdTree and anywhere a
// one-off scan is cheaper than building an index.
std::vector<KdTree::Hit> brute_force_knn(std::span<const double> coords, std::size_t dim,
                                         std::span<const double> q, std::size_t kn);

double squared_distance(std::span<const double> a, std::span<const double> b);

} // namespace flowcast
