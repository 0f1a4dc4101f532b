#include "repgraph/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "repgraph/error.hpp"
#include "repgraph/sketch.hpp"
#include "repgraph/util.hpp"

namespace repgraph::synthgen {

namespace {

double exact_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t inter = 0;
    for (const auto& s : a) inter += b.count(s);
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string random_sequence(util::SplitRng& rng, const std::string& alphabet,
                            std::size_t min_len, std::size_t max_len) {
    const std::size_t len =
        min_len + static_cast<std::size_t>(rng.next_below(max_len - min_len + 1));
    std::string s(len, 'A');
    for (auto& c : s) c = alphabet[rng.next_below(alphabet.size())];
    return s;
}

} // namespace

SynthResult generate(const SynthSpec& spec) {
    if (spec.n == 0 || spec.blocks == 0 || spec.blocks > spec.n)
        throw InvalidArgument("synthgen: need 1 <= blocks <= n");
    if (spec.min_len < 1 || spec.min_len > spec.max_len)
        throw InvalidArgument("synthgen: bad length range");
    if (spec.mutation_rate < 0 || spec.mutation_rate > 1 || spec.cross_noise < 0 ||
        spec.cross_noise > 1)
        throw InvalidArgument("synthgen: rates must lie in [0,1]");
    double frac_sum = 0;
    for (const auto& [name, frac] : spec.subgroup_fractions) {
        if (frac < 0) throw InvalidArgument("synthgen: negative subgroup fraction");
        frac_sum += frac;
    }
    if (spec.subgroup_fractions.empty() || std::abs(frac_sum - 1.0) > 1e-9)
        throw InvalidArgument("synthgen: subgroup fractions must sum to 1");

    // The alphabet without the wildcard keeps every residue mutable.
    const std::string alphabet = ingest::amino_alphabet(false);
    util::SplitRng rng(spec.seed, 0x9e37);

    std::vector<std::string> ancestors(spec.blocks);
    for (auto& a : ancestors)
        a = random_sequence(rng, alphabet, spec.min_len, spec.max_len);

    // Subgroup sizes by largest remainder so they sum to n exactly.
    std::vector<std::size_t> group_sizes(spec.subgroup_fractions.size());
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        group_sizes[g] = static_cast<std::size_t>(
            std::floor(spec.subgroup_fractions[g].second * spec.n));
        assigned += group_sizes[g];
    }
    for (std::size_t g = 0; assigned < spec.n; g = (g + 1) % group_sizes.size()) {
        ++group_sizes[g];
        ++assigned;
    }

    SynthResult out;
    out.dataset.alphabet = ingest::amino_alphabet(true);
    out.truth.block_of.resize(spec.n);
    out.truth.subgroup_of.resize(spec.n);

    std::size_t group = 0, left_in_group = group_sizes[0];
    for (std::size_t i = 0; i < spec.n; ++i) {
        // Contiguous block chunks; subgroups fill index ranges in order, so
        // a trailing rare group concentrates inside the last block.
        const std::size_t block = i * spec.blocks / spec.n;
        while (left_in_group == 0) left_in_group = group_sizes[++group];
        --left_in_group;

        std::string residues;
        const bool off_block =
            spec.cross_noise > 0 && rng.next_double() < spec.cross_noise;
        if (off_block) {
            residues = random_sequence(rng, alphabet, spec.min_len, spec.max_len);
        } else {
            residues = ancestors[block];
            for (auto& c : residues) {
                if (rng.next_double() >= spec.mutation_rate) continue;
                char repl = alphabet[rng.next_below(alphabet.size())];
                while (repl == c) repl = alphabet[rng.next_below(alphabet.size())];
                c = repl;
            }
        }

        ingest::SequenceRecord rec;
        rec.id = "seq" + std::to_string(i);
        rec.residues = residues;
        rec.subgroup = spec.subgroup_fractions[group].first;
        out.dataset.records.push_back(std::move(rec));
        out.dataset.subgroup_table[spec.subgroup_fractions[group].first].push_back(i);
        out.truth.block_of[i] = block;
        out.truth.subgroup_of[i] = spec.subgroup_fractions[group].first;
    }

    // Ground truth: within-block pairs whose exact shingle Jaccard clears
    // tau. The brute-force pass over all pairs doubles as a self-check that
    // no cross-block pair sneaks above the cutoff.
    std::vector<std::set<std::string>> shingles(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        shingles[i] =
            sketch::shingle(out.dataset.records[i].residues, spec.shingle_len);
    for (std::uint32_t i = 0; i < spec.n; ++i)
        for (std::uint32_t j = i + 1; j < spec.n; ++j) {
            const bool hit =
                exact_jaccard(shingles[i], shingles[j]) >= spec.shingle_jaccard_tau;
            if (!hit) continue;
            if (out.truth.block_of[i] != out.truth.block_of[j])
                throw Error("synthgen: cross-block pair above the Jaccard cutoff; "
                            "retry with another seed or lower noise");
            out.truth.true_pairs.emplace_back(i, j);
        }
    return out;
}

} // namespace repgraph::synthgen
