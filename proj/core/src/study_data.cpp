#include "dtaboot/study_data.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "dtaboot/stats.hpp"

namespace dtaboot {

std::string_view to_string(CorrectionPolicy policy) {
    switch (policy) {
        case CorrectionPolicy::AffectedStudies: return "affected";
        case CorrectionPolicy::AllStudies: return "all";
        case CorrectionPolicy::None: return "none";
    }
    return "affected";
}

CorrectionPolicy correction_policy_from_string(std::string_view name) {
    if (name == "affected" || name == "affected-studies") return CorrectionPolicy::AffectedStudies;
    if (name == "all" || name == "all-studies") return CorrectionPolicy::AllStudies;
    if (name == "none") return CorrectionPolicy::None;
    throw parse_error("unknown correction policy '" + std::string(name) +
                      "' (expected affected, all, or none)");
}

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

long long parse_count(const std::string& field, const char* column, std::size_t line_no) {
    const std::string t = trim(field);
    if (t.empty())
        throw parse_error("missing " + std::string(column) + " at line " + std::to_string(line_no));
    long long value = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw parse_error("non-integer count '" + t + "' in column " + column + " at line " +
                          std::to_string(line_no));
    if (value < 0)
        throw parse_error("negative count at line " + std::to_string(line_no));
    return value;
}

} // namespace

Dataset parse_dataset(std::istream& in, std::string name) {
    Dataset dataset;
    dataset.name = std::move(name);

    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool has_test_column = false;
    std::unordered_set<std::string> labels;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;

        auto fields = split_csv_line(stripped);
        if (!header_seen) {
            if (fields.size() < 5)
                throw parse_error("header must be study,TP,FP,FN,TN[,test] (line " +
                                  std::to_string(line_no) + ")");
            const char* expected[] = {"study", "tp", "fp", "fn", "tn"};
            for (int i = 0; i < 5; ++i) {
                if (lower(fields[static_cast<std::size_t>(i)]) != expected[i])
                    throw parse_error("unexpected header column '" + fields[static_cast<std::size_t>(i)] +
                                      "' (expected '" + expected[i] + "') at line " + std::to_string(line_no));
            }
            if (fields.size() == 6) {
                if (lower(fields[5]) != "test")
                    throw parse_error("sixth header column must be 'test' (line " + std::to_string(line_no) + ")");
                has_test_column = true;
            } else if (fields.size() > 6) {
                throw parse_error("too many header columns at line " + std::to_string(line_no));
            }
            header_seen = true;
            continue;
        }

        const std::size_t expected_fields = has_test_column ? 6u : 5u;
        if (fields.size() != expected_fields)
            throw parse_error("malformed row at line " + std::to_string(line_no) + ": expected " +
                              std::to_string(expected_fields) + " fields, got " +
                              std::to_string(fields.size()));

        Study2x2 study;
        study.label = fields[0];
        if (study.label.empty())
            throw parse_error("empty study label at line " + std::to_string(line_no));
        if (!labels.insert(study.label).second)
            throw parse_error("duplicate label '" + study.label + "' at line " + std::to_string(line_no));
        study.tp = parse_count(fields[1], "TP", line_no);
        study.fp = parse_count(fields[2], "FP", line_no);
        study.fn = parse_count(fields[3], "FN", line_no);
        study.tn = parse_count(fields[4], "TN", line_no);
        if (has_test_column) study.test_group = fields[5];

        if (study.n_pos() < 1)
            throw parse_error("study '" + study.label + "' has no diseased subjects (TP+FN=0) at line " +
                              std::to_string(line_no));
        if (study.n_neg() < 1)
            throw parse_error("study '" + study.label + "' has no non-diseased subjects (FP+TN=0) at line " +
                              std::to_string(line_no));

        dataset.studies.push_back(std::move(study));
    }

    if (!header_seen) throw parse_error("empty file: no header row found");
    if (dataset.studies.empty()) throw parse_error("no data rows after header");
    return dataset;
}

Dataset parse_dataset_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path.string() + "'");
    return parse_dataset(in, path.stem().string());
}

OutcomeSet to_outcomes(const Dataset& dataset, CorrectionPolicy policy) {
    OutcomeSet result;
    result.source = dataset;
    result.policy = policy;
    result.outcomes.reserve(dataset.studies.size());

    for (const auto& study : dataset.studies) {
        if (study.n_pos() < 1 || study.n_neg() < 1)
            throw parse_error("study '" + study.label + "' has an empty arm");

        bool correct = false;
        switch (policy) {
            case CorrectionPolicy::AllStudies:
                correct = true;
                break;
            case CorrectionPolicy::AffectedStudies:
                correct = study.has_zero_cell();
                break;
            case CorrectionPolicy::None:
                if (study.has_zero_cell())
                    throw parse_error("study '" + study.label +
                                      "' has a zero cell; correction policy 'none' cannot transform it");
                break;
        }

        const double add = correct ? 0.5 : 0.0;
        const double tp = static_cast<double>(study.tp) + add;
        const double fp = static_cast<double>(study.fp) + add;
        const double fn = static_cast<double>(study.fn) + add;
        const double tn = static_cast<double>(study.tn) + add;
        const double n_pos = tp + fn;
        const double n_neg = fp + tn;

        LogitOutcome out;
        out.y_a = logit(tp / n_pos);
        out.y_b = logit(fp / n_neg);
        out.s2_a = 1.0 / tp + 1.0 / fn;
        out.s2_b = 1.0 / fp + 1.0 / tn;
        if (!std::isfinite(out.y_a) || !std::isfinite(out.y_b) || !(out.s2_a > 0.0) || !(out.s2_b > 0.0))
            throw parse_error("study '" + study.label + "' produced a non-finite logit outcome");
        result.outcomes.push_back(out);
    }
    return result;
}

Dataset filter_group(const Dataset& dataset, std::string_view group) {
    Dataset out;
    out.name = dataset.name.empty() ? std::string(group) : dataset.name + ":" + std::string(group);
    for (const auto& study : dataset.studies) {
        if (study.test_group == group) out.studies.push_back(study);
    }
    return out;
}

std::vector<std::string> group_names(const Dataset& dataset) {
    std::vector<std::string> names;
    for (const auto& study : dataset.studies) {
        if (std::find(names.begin(), names.end(), study.test_group) == names.end())
            names.push_back(study.test_group);
    }
    return names;
}

OutcomeSet drop_study(const OutcomeSet& outcomes, std::size_t index) {
    if (index >= outcomes.size()) throw std::out_of_range("drop_study: index out of range");
    OutcomeSet out;
    out.policy = outcomes.policy;
    out.source.name = outcomes.source.name;
    out.source.studies.reserve(outcomes.size() - 1);
    out.outcomes.reserve(outcomes.size() - 1);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (i == index) continue;
        out.source.studies.push_back(outcomes.source.studies[i]);
        out.outcomes.push_back(outcomes.outcomes[i]);
    }
    return out;
}

} // namespace dtaboot
