#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace repgraph::sketch {

struct Sketch {
    std::vector<std::uint64_t> signature;
    std::string block_key;
    std::size_t owner = 0;

    std::size_t m() const { return signature.size(); }
};

struct CandidateSet {
    // Deduplicated (i, j) with i < j, sorted.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

    std::size_t count() const { return pairs.size(); }
};

// Banded index over sketches; buckets within a block are contiguous after
// the sort-based build.
class LshIndex {
public:
    LshIndex(std::vector<Sketch> sketches, std::size_t bands, std::size_t rows);

    std::size_t bands() const { return bands_; }
    std::size_t rows_per_band() const { return rows_; }
    std::size_t m() const { return bands_ * rows_; }

    // Bucket ids a sketch lands in, for tests and diagnostics.
    std::vector<std::size_t> buckets_of(std::size_t owner) const;

    CandidateSet query_candidates() const;

private:
    struct Posting {
        std::uint64_t block_hash;
        std::uint32_t band;
        std::uint64_t band_hash;
        std::uint32_t owner;

        bool operator<(const Posting& o) const {
            if (block_hash != o.block_hash) return block_hash < o.block_hash;
            if (band != o.band) return band < o.band;
            if (band_hash != o.band_hash) return band_hash < o.band_hash;
            return owner < o.owner;
        }
        bool same_bucket(const Posting& o) const {
            return block_hash == o.block_hash && band == o.band &&
                   band_hash == o.band_hash;
        }
    };

    std::size_t bands_;
    std::size_t rows_;
    std::vector<Posting> postings_; // sorted, buckets contiguous
};

// All length-k substrings; a string shorter than k yields itself.
std::set<std::string> shingle(std::string_view residues, std::size_t k);

// MinHash signature over m seeded multiply-shift hash slots.
Sketch minhash_sketch(const std::set<std::string>& kmers, std::size_t m,
                      std::uint64_t seed);

// Fraction of matching signature slots.
double estimate_jaccard(const Sketch& a, const Sketch& b);

// Convenience: sketch every record's residues; parallel, deterministic.
std::vector<Sketch> sketch_all(const std::vector<std::string>& sequences,
                               const std::vector<std::string>& block_keys,
                               std::size_t k, std::size_t m, std::uint64_t seed,
                               unsigned threads = 1);

// 1/sqrt(m) + eps_impl.
double prefilter_error_bound(std::size_t m, double eps_impl);

// (mem_baseline - mem_lsh) / mem_lsh * 100.
double storage_efficiency(double mem_baseline, double mem_lsh);

// Sketch cache file, little-endian: magic "RGSK", version, m, k, seed, n,
// then n*m u64 minima.
void write_sketch_cache(const std::string& path, const std::vector<Sketch>& sketches,
                        std::uint32_t k, std::uint64_t seed);
std::vector<Sketch> read_sketch_cache(const std::string& path, std::uint32_t expect_m,
                                      std::uint32_t expect_k, std::uint64_t expect_seed);

} // namespace repgraph::sketch
