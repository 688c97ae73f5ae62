#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>

#include "rembed/error.hpp"
#include "rembed/io.hpp"

namespace rembed {

namespace {

bool is_blank(char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\v' || ch == '\f'; }

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_blank(line[i])) ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_blank(line[i])) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::uint64_t parse_count(std::string_view s, std::size_t line, const char* what) {
    if (!all_digits(s)) throw ParseError(line, std::string("malformed ") + what + " '" + std::string(s) + "'");
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc::result_out_of_range)
        throw ParseError(line, std::string(what) + " '" + std::string(s) + "' overflows");
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(line, std::string("malformed ") + what + " '" + std::string(s) + "'");
    return v;
}

// 1-based id in the file -> 0-based id in memory, bounded by `limit` when one is known.
Index parse_id(std::string_view s, std::size_t line, const char* what, std::uint64_t limit) {
    const std::uint64_t id = parse_count(s, line, what);
    if (id == 0) throw ParseError(line, std::string(what) + " ids are 1-based; got 0");
    if (id > std::numeric_limits<Index>::max())
        throw ParseError(line, std::string(what) + " id " + std::to_string(id) + " overflows the index type");
    if (id > limit)
        throw ParseError(line, std::string(what) + " id " + std::to_string(id) + " exceeds declared dimension " +
                                   std::to_string(limit));
    return static_cast<Index>(id - 1);
}

double parse_value(std::string_view s, std::size_t line) {
    double v = 0.0;
    if (s.empty()) throw ParseError(line, "missing feature value");
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(line, "non-numeric feature value '" + std::string(s) + "'");
    if (!std::isfinite(v)) throw ParseError(line, "non-finite feature value '" + std::string(s) + "'");
    return v;
}

}  // namespace

ParsedDataset parse_multilabel_text(std::istream& in) {
    using Row = std::vector<std::pair<Index, double>>;
    std::vector<Row> feature_rows;
    std::vector<Row> label_rows;
    ParseReport report;

    std::uint64_t declared_n = 0, declared_d = 0, declared_c = 0;
    std::uint64_t d_limit = std::numeric_limits<Index>::max();
    std::uint64_t c_limit = std::numeric_limits<Index>::max();
    std::size_t max_feature = 0, max_label = 0;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        auto tokens = split_whitespace(view);

        if (lineno == 1 && tokens.size() == 3 && std::all_of(tokens.begin(), tokens.end(), all_digits)) {
            declared_n = parse_count(tokens[0], lineno, "header count");
            declared_d = parse_count(tokens[1], lineno, "header count");
            declared_c = parse_count(tokens[2], lineno, "header count");
            if (declared_d > std::numeric_limits<Index>::max() || declared_c > std::numeric_limits<Index>::max())
                throw ParseError(lineno, "header dimensions overflow the index type");
            d_limit = declared_d;
            c_limit = declared_c;
            report.header_present = true;
            continue;
        }

        Row labels;
        Row features;
        std::size_t first_feature = 0;
        const bool labels_present =
            !tokens.empty() && !is_blank(view.front()) && tokens[0].find(':') == std::string_view::npos;
        if (labels_present) {
            first_feature = 1;
            std::string_view field = tokens[0];
            std::size_t start = 0;
            for (;;) {
                const std::size_t comma = field.find(',', start);
                const std::string_view piece =
                    field.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
                if (piece.empty()) throw ParseError(lineno, "empty label in '" + std::string(field) + "'");
                labels.emplace_back(parse_id(piece, lineno, "label", c_limit), 1.0);
                if (comma == std::string_view::npos) break;
                start = comma + 1;
            }
        } else {
            report.empty_label_lines.push_back(lineno);
        }

        for (std::size_t t = first_feature; t < tokens.size(); ++t) {
            const std::string_view tok = tokens[t];
            const std::size_t colon = tok.find(':');
            if (colon == std::string_view::npos)
                throw ParseError(lineno, "feature token '" + std::string(tok) + "' lacks ':'");
            features.emplace_back(parse_id(tok.substr(0, colon), lineno, "feature", d_limit),
                                  parse_value(tok.substr(colon + 1), lineno));
        }

        auto by_id = [](const auto& a, const auto& b) { return a.first < b.first; };
        auto same_id = [](const auto& a, const auto& b) { return a.first == b.first; };
        std::sort(labels.begin(), labels.end(), by_id);
        if (std::adjacent_find(labels.begin(), labels.end(), same_id) != labels.end())
            throw ParseError(lineno, "duplicate label id");
        std::sort(features.begin(), features.end(), by_id);
        if (std::adjacent_find(features.begin(), features.end(), same_id) != features.end())
            throw ParseError(lineno, "duplicate feature id");

        if (!labels.empty()) max_label = std::max<std::size_t>(max_label, labels.back().first + 1);
        if (!features.empty()) max_feature = std::max<std::size_t>(max_feature, features.back().first + 1);
        label_rows.push_back(std::move(labels));
        feature_rows.push_back(std::move(features));
    }
    if (in.bad()) throw Error("parse_multilabel_text: read failure");

    report.lines = lineno;
    report.examples = feature_rows.size();
    if (report.header_present && declared_n != feature_rows.size())
        throw ParseError(lineno, "header declares " + std::to_string(declared_n) + " examples but " +
                                     std::to_string(feature_rows.size()) + " were found");

    const std::size_t d = report.header_present ? declared_d : max_feature;
    const std::size_t c = report.header_present ? declared_c : max_label;
    ParsedDataset out;
    out.dataset.features = SparseMatrix::from_rows(d, feature_rows);
    out.dataset.labels = SparseMatrix::from_rows(c, label_rows);
    out.dataset.kind = infer_kind(out.dataset.labels);
    out.report = std::move(report);
    return out;
}

ParsedDataset parse_multilabel_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset '" + path.string() + "'");
    return parse_multilabel_text(in);
}

void write_multilabel_text(const Dataset& data, std::ostream& out) {
    data.validate();
    out << data.size() << ' ' << data.num_features() << ' ' << data.num_labels() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto labels = data.labels.row_indices(i);
        auto fidx = data.features.row_indices(i);
        auto fval = data.features.row_values(i);
        if (labels.empty()) {
            // Leading space marks an empty label field.
            if (!fidx.empty()) out << ' ';
        } else {
            for (std::size_t p = 0; p < labels.size(); ++p) out << (p ? "," : "") << labels[p] + 1;
        }
        for (std::size_t p = 0; p < fidx.size(); ++p) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, fval[p]);
            out << ' ' << fidx[p] + 1 << ':' << std::string_view(buf, static_cast<std::size_t>(end - buf));
        }
        out << '\n';
    }
}

void write_multilabel_text(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset '" + path.string() + "'");
    write_multilabel_text(data, out);
    if (!out) throw Error("write failure on '" + path.string() + "'");
}

}  // namespace rembed
