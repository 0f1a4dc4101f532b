#include "repgraph/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "repgraph/error.hpp"
#include "repgraph/util.hpp"

namespace repgraph::sketch {

std::set<std::string> shingle(std::string_view residues, std::size_t k) {
    if (k == 0) throw InvalidArgument("shingle: k must be >= 1");
    std::set<std::string> out;
    if (residues.size() < k) {
        out.emplace(residues);
        return out;
    }
    for (std::size_t i = 0; i + k <= residues.size(); ++i)
        out.emplace(residues.substr(i, k));
    return out;
}

namespace {

// Per-slot constants from a splittable seeded stream; odd multiplier makes
// x -> a*x + b a bijection on 64-bit words.
struct SlotHash {
    std::uint64_t a;
    std::uint64_t b;
    std::uint64_t operator()(std::uint64_t x) const { return a * x + b; }
};

std::vector<SlotHash> slot_hashes(std::size_t m, std::uint64_t seed) {
    std::vector<SlotHash> hs(m);
    for (std::size_t p = 0; p < m; ++p) {
        hs[p].a = util::splitmix64(seed ^ (2 * p + 1)) | 1ULL;
        hs[p].b = util::splitmix64(seed ^ (2 * p + 2));
    }
    return hs;
}

Sketch sketch_one(const std::set<std::string>& kmers,
                  const std::vector<SlotHash>& hs) {
    if (kmers.empty()) throw InvalidArgument("minhash_sketch: empty k-mer set");
    Sketch sk;
    sk.signature.assign(hs.size(), std::numeric_limits<std::uint64_t>::max());
    for (const auto& kmer : kmers) {
        // Scatter the k-mer once, then apply the cheap per-slot bijection.
        const std::uint64_t x = util::splitmix64(util::hash_string(kmer));
        for (std::size_t p = 0; p < hs.size(); ++p)
            sk.signature[p] = std::min(sk.signature[p], hs[p](x));
    }
    return sk;
}

} // namespace

Sketch minhash_sketch(const std::set<std::string>& kmers, std::size_t m,
                      std::uint64_t seed) {
    if (m == 0) throw InvalidArgument("minhash_sketch: m must be >= 1");
    return sketch_one(kmers, slot_hashes(m, seed));
}

double estimate_jaccard(const Sketch& a, const Sketch& b) {
    if (a.m() != b.m() || a.m() == 0)
        throw InvalidArgument("estimate_jaccard: incompatible sketch lengths");
    std::size_t match = 0;
    for (std::size_t p = 0; p < a.m(); ++p)
        if (a.signature[p] == b.signature[p]) ++match;
    return static_cast<double>(match) / static_cast<double>(a.m());
}

std::vector<Sketch> sketch_all(const std::vector<std::string>& sequences,
                               const std::vector<std::string>& block_keys,
                               std::size_t k, std::size_t m, std::uint64_t seed,
                               unsigned threads) {
    if (!block_keys.empty() && block_keys.size() != sequences.size())
        throw InvalidArgument("sketch_all: block key count mismatch");
    const auto hs = slot_hashes(m, seed);
    std::vector<Sketch> out(sequences.size());
    util::parallel_for(sequences.size(), threads, [&](std::size_t i) {
        out[i] = sketch_one(shingle(sequences[i], k), hs);
        out[i].owner = i;
        if (!block_keys.empty()) out[i].block_key = block_keys[i];
    });
    return out;
}

LshIndex::LshIndex(std::vector<Sketch> sketches, std::size_t bands, std::size_t rows)
    : bands_(bands), rows_(rows) {
    if (bands == 0 || rows == 0)
        throw InvalidArgument("LshIndex: bands and rows must be >= 1");
    for (const auto& sk : sketches)
        if (sk.m() != bands * rows)
            throw InvalidArgument("LshIndex: banding mismatch, b*r != m");

    postings_.reserve(sketches.size() * bands);
    for (const auto& sk : sketches) {
        const std::uint64_t block = util::hash_string(sk.block_key);
        for (std::size_t band = 0; band < bands; ++band) {
            Posting p;
            p.block_hash = block;
            p.band = static_cast<std::uint32_t>(band);
            p.band_hash = util::fnv1a64(sk.signature.data() + band * rows,
                                        rows * sizeof(std::uint64_t));
            p.owner = static_cast<std::uint32_t>(sk.owner);
            postings_.push_back(p);
        }
    }
    std::sort(postings_.begin(), postings_.end());
}

std::vector<std::size_t> LshIndex::buckets_of(std::size_t owner) const {
    std::vector<std::size_t> out;
    std::size_t bucket = 0;
    for (std::size_t i = 0; i < postings_.size(); ++i) {
        if (i > 0 && !postings_[i].same_bucket(postings_[i - 1])) ++bucket;
        if (postings_[i].owner == owner) out.push_back(bucket);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CandidateSet LshIndex::query_candidates() const {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= postings_.size(); ++i) {
        if (i == postings_.size() || !postings_[i].same_bucket(postings_[start])) {
            for (std::size_t a = start; a < i; ++a)
                for (std::size_t b = a + 1; b < i; ++b) {
                    auto lo = postings_[a].owner;
                    auto hi = postings_[b].owner;
                    if (lo == hi) continue;
                    if (lo > hi) std::swap(lo, hi);
                    pairs.emplace_back(lo, hi);
                }
            start = i;
        }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    CandidateSet cs;
    cs.pairs = std::move(pairs);
    return cs;
}

double prefilter_error_bound(std::size_t m, double eps_impl) {
    if (m == 0 || eps_impl < 0)
        throw InvalidArgument("prefilter_error_bound: need m >= 1, eps >= 0");
    return 1.0 / std::sqrt(static_cast<double>(m)) + eps_impl;
}

double storage_efficiency(double mem_baseline, double mem_lsh) {
    if (mem_lsh <= 0)
        throw InvalidArgument("storage_efficiency: mem_lsh must be positive");
    return (mem_baseline - mem_lsh) / mem_lsh * 100.0;
}

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

constexpr char kMagic[4] = {'R', 'G', 'S', 'K'};
constexpr std::uint32_t kVersion = 1;

} // namespace

void write_sketch_cache(const std::string& path, const std::vector<Sketch>& sketches,
                        std::uint32_t k, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open sketch cache for writing: " + path);
    const std::uint32_t m = sketches.empty()
                                ? 0
                                : static_cast<std::uint32_t>(sketches.front().m());
    out.write(kMagic, 4);
    write_le(out, kVersion);
    write_le(out, m);
    write_le(out, k);
    write_le(out, seed);
    write_le(out, static_cast<std::uint64_t>(sketches.size()));
    for (const auto& sk : sketches)
        for (std::uint64_t v : sk.signature) write_le(out, v);
    if (!out) throw IoError("write failure on sketch cache: " + path);
}

std::vector<Sketch> read_sketch_cache(const std::string& path, std::uint32_t expect_m,
                                      std::uint32_t expect_k, std::uint64_t expect_seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sketch cache: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("bad sketch cache magic: " + path);
    const auto version = read_le<std::uint32_t>(in);
    const auto m = read_le<std::uint32_t>(in);
    const auto k = read_le<std::uint32_t>(in);
    const auto seed = read_le<std::uint64_t>(in);
    const auto n = read_le<std::uint64_t>(in);
    if (version != kVersion || m != expect_m || k != expect_k || seed != expect_seed)
        throw IoError("sketch cache parameter mismatch: " + path);
    std::vector<Sketch> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        out[i].owner = i;
        out[i].signature.resize(m);
        for (std::uint32_t p = 0; p < m; ++p)
            out[i].signature[p] = read_le<std::uint64_t>(in);
    }
    if (!in) throw IoError("truncated sketch cache: " + path);
    return out;
}

} // namespace repgraph::sketch
