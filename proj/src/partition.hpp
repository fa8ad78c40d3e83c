#pragma once

#include <cstdint>
#include <vector>

namespace nvm {

// Set partitions of {0..k-1} in restricted-growth form: label[i] is the
// block id of element i, blocks numbered by first appearance (label[0]=0,
// label[i] <= max(label[0..i-1])+1). Used for coalescence bookkeeping of up
// to a handful of backward paths.
using Partition = std::vector<int>;

// Canonicalize arbitrary block labels into restricted-growth form.
inline Partition canonical_partition(const std::vector<int>& labels) {
    Partition out(labels.size(), -1);
    std::vector<int> remap;
    for (size_t i = 0; i < labels.size(); ++i) {
        int id = -1;
        for (size_t j = 0; j < remap.size(); ++j)
            if (remap[j] == labels[i]) id = static_cast<int>(j);
        if (id < 0) {
            id = static_cast<int>(remap.size());
            remap.push_back(labels[i]);
        }
        out[i] = id;
    }
    return out;
}

inline int block_count(const Partition& p) {
    int mx = -1;
    for (int b : p) mx = std::max(mx, b);
    return mx + 1;
}

inline bool same_block(const Partition& p, int i, int j) { return p[i] == p[j]; }

// Compact integer code (k <= 12 with block ids < 12).
inline uint64_t partition_code(const Partition& p) {
    uint64_t code = 1;
    for (int b : p) code = code * 13 + static_cast<uint64_t>(b);
    return code;
}

inline std::vector<Partition> all_partitions(int k) {
    std::vector<Partition> out;
    Partition cur(k, 0);
    // Enumerate restricted-growth strings.
    auto rec = [&](auto&& self, int i, int max_used) -> void {
        if (i == k) {
            out.push_back(cur);
            return;
        }
        for (int b = 0; b <= max_used + 1; ++b) {
            cur[i] = b;
            self(self, i + 1, std::max(max_used, b));
        }
    };
    if (k == 0) {
        out.push_back({});
        return out;
    }
    cur[0] = 0;
    rec(rec, 1, 0);
    return out;
}

// Coarsen `base` (partition of paths into blocks) by `merge` (partition of
// the block ids 0..B-1): paths whose blocks fall in the same merge-block end
// up together.
inline Partition coarsen(const Partition& base, const Partition& merge) {
    std::vector<int> labels(base.size());
    for (size_t i = 0; i < base.size(); ++i) labels[i] = merge[base[i]];
    return canonical_partition(labels);
}

}  // namespace nvm
