#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace repgraph::ingest {

struct SequenceRecord {
    std::string id;
    std::string residues;
    std::optional<double> frequency;
    std::optional<std::string> subgroup;
    std::map<std::string, std::string> metadata;
};

struct RepertoireDataset {
    std::vector<SequenceRecord> records;
    std::unordered_map<std::string, std::vector<std::size_t>> subgroup_table;
    std::string alphabet;

    std::size_t n() const { return records.size(); }
};

struct BatchPlan {
    std::size_t batch_size = 0;
    std::uint64_t mem_available = 0;
    std::size_t len_max = 0;
    std::uint64_t per_seq_cost = 0;
};

// Column names in the input TSV. Only `residues` is mandatory.
struct ColumnSchema {
    std::string id = "id";
    std::string residues = "cdr3";
    std::string frequency = "frequency";
    std::string subgroup = "subgroup";
};

// 20 canonical amino acids; wildcard appended when enabled.
std::string amino_alphabet(bool wildcard = true);
std::string nucleotide_alphabet(bool wildcard = true);

// Parses a tab-separated stream with a header row. Rows are validated
// against `alphabet`; sequences longer than `max_len` (when nonzero) are
// truncated. Columns not named in the schema land in record metadata.
RepertoireDataset parse_repertoire(std::istream& stream,
                                   const ColumnSchema& schema = {},
                                   const std::string& alphabet = amino_alphabet(),
                                   std::size_t max_len = 0);

// Writes the dataset back in the input TSV layout (lossless for valid rows).
void serialize_repertoire(const RepertoireDataset& dataset, std::ostream& out,
                          const ColumnSchema& schema = {});

// Replaces every missing frequency with the median of the present ones.
// Even-count median is the mean of the two middle order statistics.
RepertoireDataset impute_frequencies(RepertoireDataset dataset);

// batch_size = min(n, max(32, floor(sqrt(mem_available / (per_seq_cost * len_max))))).
BatchPlan plan_batches(std::size_t n, std::uint64_t mem_available,
                       std::size_t len_max, std::uint64_t per_seq_cost);

} // namespace repgraph::ingest
