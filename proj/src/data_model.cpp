#include "edgemeta/data_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace edgemeta {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace and CR
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? ""
                                                    : field.substr(first, last - first + 1));
    }
    return fields;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double parse_number(const std::string& s, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line_no) + ": cannot parse number '" +
                              s + "'");
    }
}

long parse_count(const std::string& s, std::size_t line_no) {
    const double v = parse_number(s, line_no);
    const long n = std::lround(v);
    if (static_cast<double>(n) != v) {
        throw ValidationError("line " + std::to_string(line_no) + ": count '" + s +
                              "' is not an integer");
    }
    return n;
}

}  // namespace

Study log_or_from_counts(long events1, long total1, long events2, long total2,
                         const std::string& label, bool continuity_correction) {
    if (events1 < 0 || events2 < 0 || total1 < 0 || total2 < 0) {
        throw ValidationError("log_or_from_counts: negative count");
    }
    if (events1 > total1 || events2 > total2) {
        throw ValidationError("log_or_from_counts: events exceed total");
    }
    double a = static_cast<double>(events1);
    double b = static_cast<double>(total1 - events1);
    double c = static_cast<double>(events2);
    double d = static_cast<double>(total2 - events2);
    if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) {
        if (!continuity_correction) {
            throw ValidationError(
                "log_or_from_counts: zero cell; enable continuity correction");
        }
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }
    Study s;
    s.effect = std::log(a * d / (b * c));
    s.variance = 1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d;
    s.label = label;
    s.counts = CountTable{events1, total1, events2, total2};
    return s;
}

MetaDataset validate_dataset(std::vector<Study> studies, EffectScale scale) {
    if (studies.size() < 2) {
        throw ValidationError("validate_dataset: k < 2 (need at least two studies)");
    }
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const Study& s = studies[i];
        const std::string where = "study " + std::to_string(i + 1) +
                                  (s.label.empty() ? "" : " (" + s.label + ")");
        if (!std::isfinite(s.effect)) {
            throw ValidationError("validate_dataset: non-finite effect in " + where);
        }
        if (!std::isfinite(s.variance) || s.variance <= 0.0) {
            throw ValidationError("validate_dataset: variance must be finite and > 0 in " +
                                  where);
        }
        if (s.counts) {
            const Study ref = log_or_from_counts(s.counts->events1, s.counts->total1,
                                                 s.counts->events2, s.counts->total2,
                                                 s.label, true);
            if (std::fabs(ref.effect - s.effect) > 1e-10 ||
                std::fabs(ref.variance - s.variance) > 1e-10) {
                throw ValidationError(
                    "validate_dataset: effect/variance inconsistent with counts in " + where);
            }
        }
    }
    return MetaDataset(std::move(studies), scale);
}

MetaDataset parse_csv(const std::string& content, bool continuity_correction) {
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ValidationError("empty CSV input");
    ++line_no;
    const auto header = split_csv_line(line);
    std::vector<std::string> names;
    names.reserve(header.size());
    for (const auto& h : header) names.push_back(lower(h));

    bool counts_schema;
    if (names.size() == 3 && names[0] == "label" && names[1] == "effect" &&
        names[2] == "se") {
        counts_schema = false;
    } else if (names.size() == 5 && names[0] == "label" && names[1] == "events1" &&
               names[2] == "total1" && names[3] == "events2" && names[4] == "total2") {
        counts_schema = true;
    } else {
        throw ValidationError(
            "line 1: unrecognized header; expected 'label,effect,se' or "
            "'label,events1,total1,events2,total2'");
    }

    std::vector<Study> studies;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != names.size()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(names.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        if (counts_schema) {
            studies.push_back(log_or_from_counts(
                parse_count(fields[1], line_no), parse_count(fields[2], line_no),
                parse_count(fields[3], line_no), parse_count(fields[4], line_no), fields[0],
                continuity_correction));
        } else {
            Study s;
            s.label = fields[0];
            s.effect = parse_number(fields[1], line_no);
            const double se = parse_number(fields[2], line_no);
            s.variance = se * se;
            studies.push_back(std::move(s));
        }
    }
    return validate_dataset(std::move(studies),
                            counts_schema ? EffectScale::LogOddsRatio : EffectScale::Generic);
}

MetaDataset read_csv(const std::string& path, bool continuity_correction) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), continuity_correction);
}

}  // namespace edgemeta
