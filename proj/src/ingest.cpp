#include "repgraph/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "repgraph/error.hpp"
#include "repgraph/util.hpp"

namespace repgraph::util {

std::vector<std::string> split_tsv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return out;
}

} // namespace repgraph::util

namespace repgraph::ingest {

std::string amino_alphabet(bool wildcard) {
    std::string a = "ACDEFGHIKLMNPQRSTVWY";
    if (wildcard) a += 'X';
    return a;
}

std::string nucleotide_alphabet(bool wildcard) {
    std::string a = "ACGT";
    if (wildcard) a += 'N';
    return a;
}

namespace {

std::string chomp(std::string line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
        line.pop_back();
    return line;
}

double parse_frequency(const std::string& text, std::size_t line_no) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ParseError("unparseable frequency '" + text + "'", line_no);
    }
    if (pos != text.size() || !std::isfinite(v) || v < 0)
        throw ParseError("invalid frequency '" + text + "'", line_no);
    return v;
}

} // namespace

RepertoireDataset parse_repertoire(std::istream& stream, const ColumnSchema& schema,
                                   const std::string& alphabet, std::size_t max_len) {
    std::string line;
    if (!std::getline(stream, line))
        throw Error("empty input: no header row");
    const auto header = util::split_tsv(chomp(line));

    auto find_col = [&](const std::string& name) -> std::ptrdiff_t {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto col_res = find_col(schema.residues);
    if (col_res < 0)
        throw ParseError("missing residues column '" + schema.residues + "'", 1);
    const auto col_id = find_col(schema.id);
    const auto col_freq = find_col(schema.frequency);
    const auto col_sub = find_col(schema.subgroup);

    const std::unordered_set<char> allowed(alphabet.begin(), alphabet.end());

    RepertoireDataset ds;
    ds.alphabet = alphabet;
    std::unordered_set<std::string> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(stream, line)) {
        ++line_no;
        line = chomp(line);
        if (line.empty()) continue;
        const auto cols = util::split_tsv(line);
        if (cols.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) +
                                 " columns, got " + std::to_string(cols.size()),
                             line_no);

        SequenceRecord rec;
        rec.id = col_id >= 0 ? cols[col_id] : "row" + std::to_string(line_no - 1);
        if (!seen_ids.insert(rec.id).second)
            throw ParseError("duplicate id '" + rec.id + "'", line_no);

        rec.residues = cols[col_res];
        if (rec.residues.empty())
            throw ParseError("empty residues", line_no);
        for (char c : rec.residues)
            if (!allowed.count(c))
                throw ParseError(std::string("illegal character '") + c +
                                     "' in residues",
                                 line_no);
        if (max_len > 0 && rec.residues.size() > max_len)
            rec.residues.resize(max_len);

        if (col_freq >= 0 && !cols[col_freq].empty())
            rec.frequency = parse_frequency(cols[col_freq], line_no);
        if (col_sub >= 0 && !cols[col_sub].empty()) {
            rec.subgroup = cols[col_sub];
            ds.subgroup_table[*rec.subgroup].push_back(ds.records.size());
        }
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (static_cast<std::ptrdiff_t>(c) == col_res ||
                static_cast<std::ptrdiff_t>(c) == col_id ||
                static_cast<std::ptrdiff_t>(c) == col_freq ||
                static_cast<std::ptrdiff_t>(c) == col_sub)
                continue;
            rec.metadata[header[c]] = cols[c];
        }
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.empty())
        throw Error("empty input: no data rows");
    return ds;
}

void serialize_repertoire(const RepertoireDataset& dataset, std::ostream& out,
                          const ColumnSchema& schema) {
    // Collect metadata columns in deterministic order.
    std::vector<std::string> meta_cols;
    if (!dataset.records.empty())
        for (const auto& [k, v] : dataset.records.front().metadata)
            meta_cols.push_back(k);

    out << schema.id << '\t' << schema.residues << '\t' << schema.frequency
        << '\t' << schema.subgroup;
    for (const auto& m : meta_cols) out << '\t' << m;
    out << '\n';
    for (const auto& rec : dataset.records) {
        out << rec.id << '\t' << rec.residues << '\t';
        if (rec.frequency) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", *rec.frequency);
            out << buf;
        }
        out << '\t' << (rec.subgroup ? *rec.subgroup : "");
        for (const auto& m : meta_cols) {
            auto it = rec.metadata.find(m);
            out << '\t' << (it == rec.metadata.end() ? "" : it->second);
        }
        out << '\n';
    }
}

RepertoireDataset impute_frequencies(RepertoireDataset dataset) {
    std::vector<double> present;
    for (const auto& rec : dataset.records)
        if (rec.frequency) present.push_back(*rec.frequency);
    if (present.size() == dataset.records.size()) return dataset;
    if (present.empty())
        throw Error("imputation impossible: all frequencies missing");

    std::sort(present.begin(), present.end());
    const std::size_t m = present.size();
    const double median = (m % 2 == 1)
                              ? present[m / 2]
                              : 0.5 * (present[m / 2 - 1] + present[m / 2]);
    for (auto& rec : dataset.records)
        if (!rec.frequency) rec.frequency = median;
    return dataset;
}

BatchPlan plan_batches(std::size_t n, std::uint64_t mem_available,
                       std::size_t len_max, std::uint64_t per_seq_cost) {
    if (n == 0 || mem_available == 0 || len_max == 0 || per_seq_cost == 0)
        throw InvalidArgument("plan_batches: all inputs must be positive");
    const double inner = std::sqrt(static_cast<double>(mem_available) /
                                   (static_cast<double>(per_seq_cost) *
                                    static_cast<double>(len_max)));
    const auto floored = static_cast<std::uint64_t>(std::floor(inner));
    const std::uint64_t sized = std::max<std::uint64_t>(32, floored);
    BatchPlan plan;
    plan.batch_size = static_cast<std::size_t>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(n), sized));
    plan.mem_available = mem_available;
    plan.len_max = len_max;
    plan.per_seq_cost = per_seq_cost;
    return plan;
}

} // namespace repgraph::ingest
