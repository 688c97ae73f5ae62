#include <algorithm>
#include <cmath>
#include <numeric>

#include "rembed/error.hpp"
#include "rembed/io.hpp"
#include "rembed/rng.hpp"

namespace rembed {

namespace {

void shuffle(std::vector<Index>& v, RandomStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

// Splits a shuffled 0..n-1 into `parts` contiguous blocks whose sizes differ by at most one.
std::vector<std::vector<Index>> partition(std::size_t n, std::size_t parts, RandomStream& rng) {
    std::vector<Index> ids(n);
    std::iota(ids.begin(), ids.end(), Index{0});
    shuffle(ids, rng);
    std::vector<std::vector<Index>> blocks(parts);
    std::size_t pos = 0;
    for (std::size_t b = 0; b < parts; ++b) {
        const std::size_t len = n / parts + (b < n % parts ? 1 : 0);
        blocks[b].assign(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                         ids.begin() + static_cast<std::ptrdiff_t>(pos + len));
        std::sort(blocks[b].begin(), blocks[b].end());
        pos += len;
    }
    return blocks;
}

struct Plant {
    std::vector<std::vector<Index>> label_blocks;
    std::vector<std::vector<Index>> feature_pools;
};

Dataset draw(const SyntheticSpec& spec, const Plant& plant, std::size_t rows, RandomStream rng) {
    using Row = std::vector<std::pair<Index, double>>;
    const bool multiclass = spec.k_true == spec.c;
    std::vector<Row> x_rows(rows), y_rows(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t topic = rng.below(spec.k_true);
        const auto& pool = plant.feature_pools[topic];

        Row& x = x_rows[i];
        std::vector<Index> picks = pool;
        shuffle(picks, rng);
        picks.resize(std::min(spec.active_features, picks.size()));
        for (Index f : picks) x.emplace_back(f, 0.5 + rng.uniform());
        for (std::size_t b = 0; b < spec.background_features; ++b)
            x.emplace_back(static_cast<Index>(rng.below(spec.d)), 0.5 * rng.uniform());
        std::sort(x.begin(), x.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        // Merge repeated features by summing their values.
        Row merged;
        for (const auto& e : x) {
            if (!merged.empty() && merged.back().first == e.first)
                merged.back().second += e.second;
            else
                merged.push_back(e);
        }
        x = std::move(merged);

        Row& y = y_rows[i];
        if (multiclass) {
            Index label = plant.label_blocks[topic][0];
            if (spec.c > 1 && rng.uniform() < spec.noise) {
                const auto other = static_cast<Index>(rng.below(spec.c - 1));
                label = other >= label ? other + 1 : other;
            }
            y.emplace_back(label, 1.0);
        } else {
            std::vector<char> on(spec.c, 0);
            for (Index l : plant.label_blocks[topic]) on[l] = 1;
            if (spec.noise > 0.0)
                for (std::size_t l = 0; l < spec.c; ++l)
                    if (rng.uniform() < spec.noise) on[l] = !on[l];
            for (std::size_t l = 0; l < spec.c; ++l)
                if (on[l]) y.emplace_back(static_cast<Index>(l), 1.0);
        }
    }
    Dataset data;
    data.features = SparseMatrix::from_rows(spec.d, x_rows);
    data.labels = SparseMatrix::from_rows(spec.c, y_rows);
    data.kind = multiclass ? DatasetKind::Multiclass : DatasetKind::Multilabel;
    return data;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n == 0 || spec.d == 0 || spec.c == 0 || spec.k_true == 0)
        throw InvalidArgument("synthetic: n, d, c and k_true must all be positive");
    if (spec.k_true > std::min(spec.d, spec.c))
        throw InvalidArgument("synthetic: k_true must not exceed min(d, c)");
    if (!(spec.noise >= 0.0 && spec.noise <= 1.0))
        throw InvalidArgument("synthetic: noise must lie in [0, 1]");
    if (spec.active_features == 0) throw InvalidArgument("synthetic: active_features must be positive");
    if (spec.d > std::numeric_limits<Index>::max() || spec.c > std::numeric_limits<Index>::max())
        throw InvalidArgument("synthetic: dimensions overflow the index type");

    RandomStream root(spec.seed);
    RandomStream plant_rng = root.fork(0);
    Plant plant;
    plant.label_blocks = partition(spec.c, spec.k_true, plant_rng);
    plant.feature_pools = partition(spec.d, spec.k_true, plant_rng);

    SyntheticData out;
    out.train = draw(spec, plant, spec.n, root.fork(1));
    out.test = draw(spec, plant, spec.n_test ? spec.n_test : std::max<std::size_t>(1, spec.n / 4), root.fork(2));
    out.planted_basis = DenseMatrix(spec.c, spec.k_true);
    for (std::size_t z = 0; z < spec.k_true; ++z) {
        const double w = 1.0 / std::sqrt(static_cast<double>(plant.label_blocks[z].size()));
        for (Index l : plant.label_blocks[z]) out.planted_basis(l, z) = w;
    }
    return out;
}

}  // namespace rembed
