#include "forward_sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"
#include "numeric.hpp"
#include "rng.hpp"
#include "serialize.hpp"

namespace nvm {

int64_t default_burn_in(double epsilon) {
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    if (epsilon == 1.0) return 1;
    return static_cast<int64_t>(std::floor(std::log(1e-9) / std::log1p(-epsilon))) + 1;
}

Trace simulate_trace(const RootedGraph& g, double epsilon, int64_t t_max, uint64_t seed) {
    require(g.is_finite(), "graph: forward simulation is finite-only");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon: must be in (0,1]");
    require(t_max >= 1, "t_max: must be >= 1");
    if (t_max + 1 > (int64_t{1} << 33))
        throw CapacityError("t_max: trace would exceed addressable length");

    const int32_t n = g.vertex_count();
    std::vector<uint8_t> cur(n), prev(n);
    for (int32_t v = 0; v < n; ++v)
        cur[v] = static_cast<uint8_t>(hash4(seed, 0, static_cast<uint64_t>(v), 0) & 1ULL);

    Trace out;
    out.bits.reserve(t_max + 1);
    out.bits.push_back(cur[g.root()]);
    out.epsilon = epsilon;
    out.graph_descriptor = g.family_tag() == "custom"
                               ? "custom:" + std::to_string(edge_list_hash(g))
                               : g.family_tag();
    out.seed = seed;

    for (int64_t t = 1; t <= t_max; ++t) {
        prev.swap(cur);
        for (int32_t v = 0; v < n; ++v) {
            const uint64_t tu = static_cast<uint64_t>(t);
            const uint64_t vu = static_cast<uint64_t>(v);
            const double u = to_unit(hash4(seed, tu, vu, 0));
            if (u < epsilon) {
                cur[v] = static_cast<uint8_t>(hash4(seed, tu, vu, 1) & 1ULL);
            } else {
                const auto& nb = g.neighbors(v);
                uint32_t idx = bounded(hash4(seed, tu, vu, 2),
                                       static_cast<uint32_t>(nb.size()));
                cur[v] = prev[nb[idx]];
            }
        }
        out.bits.push_back(cur[g.root()]);
    }
    out.burn_in = std::min<int64_t>(default_burn_in(epsilon), out.length() - 1);
    return out;
}

std::map<uint32_t, int64_t> window_counts(const Trace& trace, int32_t w, int32_t stride) {
    require(w >= 1 && w <= 30, "w: window width must be in [1,30]");
    require(stride >= 1, "stride: must be >= 1");
    require(trace.usable_length() >= w, "w: larger than usable trace");
    std::map<uint32_t, int64_t> counts;
    const int64_t last_start = trace.length() - w;
    for (int64_t i = trace.burn_in; i <= last_start; i += stride) {
        uint32_t key = 0;
        for (int32_t j = 0; j < w; ++j) key = (key << 1) | trace.bits[i + j];
        ++counts[key];
    }
    return counts;
}

std::map<uint32_t, double> window_distribution(const Trace& trace, int32_t w) {
    auto counts = window_counts(trace, w, 1);
    int64_t total = 0;
    for (auto& [k, c] : counts) total += c;
    std::map<uint32_t, double> out;
    for (auto& [k, c] : counts) out[k] = static_cast<double>(c) / static_cast<double>(total);
    return out;
}

double window_chi2_two_sample(const Trace& a, const Trace& b, int32_t w) {
    auto ca = window_counts(a, w, 2 * w);
    auto cb = window_counts(b, w, 2 * w);
    double na = 0, nb = 0;
    for (auto& [k, c] : ca) na += c;
    for (auto& [k, c] : cb) nb += c;
    require(na > 0 && nb > 0, "chi2: empty window tallies");
    double chi2 = 0.0;
    int cells = 0;
    for (uint32_t key = 0; key < (1u << w); ++key) {
        double oa = ca.count(key) ? static_cast<double>(ca[key]) : 0.0;
        double ob = cb.count(key) ? static_cast<double>(cb[key]) : 0.0;
        double pooled = (oa + ob) / (na + nb);
        if (pooled == 0.0) continue;
        ++cells;
        double ea = pooled * na, eb = pooled * nb;
        chi2 += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    return chi2_sf(chi2, cells - 1);
}

double window_chi2_uniform(const Trace& t, int32_t w) {
    auto c = window_counts(t, w, 2 * w);
    double n = 0;
    for (auto& [k, v] : c) n += v;
    const double expect = n / std::pow(2.0, w);
    double chi2 = 0.0;
    for (uint32_t key = 0; key < (1u << w); ++key) {
        double o = c.count(key) ? static_cast<double>(c[key]) : 0.0;
        chi2 += (o - expect) * (o - expect) / expect;
    }
    return chi2_sf(chi2, std::pow(2.0, w) - 1);
}

void write_trace(const Trace& t, const std::string& bits_path, const std::string& sidecar_path) {
    std::vector<uint8_t> packed((t.bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < t.bits.size(); ++i)
        if (t.bits[i]) packed[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    std::ofstream bf(bits_path, std::ios::binary);
    if (!bf) throw IoError("cannot open for write: " + bits_path);
    bf.write(reinterpret_cast<const char*>(packed.data()),
             static_cast<std::streamsize>(packed.size()));
    bf.close();

    Json sidecar;
    sidecar["epsilon"] = t.epsilon;
    sidecar["seed"] = t.seed;
    sidecar["graph"] = t.graph_descriptor;
    sidecar["burn_in"] = t.burn_in;
    sidecar["length"] = t.length();
    sidecar["bit_order"] = "lsb_first";
    write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

Trace read_trace(const std::string& bits_path, const std::string& sidecar_path) {
    Json sidecar = Json::parse(read_text_file(sidecar_path));
    Trace t;
    t.epsilon = sidecar.at("epsilon").get<double>();
    t.seed = sidecar.at("seed").get<uint64_t>();
    t.graph_descriptor = sidecar.at("graph").get<std::string>();
    t.burn_in = sidecar.at("burn_in").get<int64_t>();
    const int64_t length = sidecar.at("length").get<int64_t>();

    std::ifstream bf(bits_path, std::ios::binary);
    if (!bf) throw IoError("cannot open for read: " + bits_path);
    std::vector<uint8_t> packed((length + 7) / 8);
    bf.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (bf.gcount() != static_cast<std::streamsize>(packed.size()))
        throw IoError("bit file shorter than sidecar length: " + bits_path);
    t.bits.resize(length);
    for (int64_t i = 0; i < length; ++i) t.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
    require(t.burn_in >= 0 && t.burn_in < t.length(), "burn_in: must be < length");
    return t;
}

}  // namespace nvm
