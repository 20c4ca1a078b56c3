#include "jamdet/eval/report.hpp"

#include "jamdet/error.hpp"
#include "jamdet/kv.hpp"
#include "jamdet/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace jamdet::eval {

namespace {

constexpr const char* kHeader =
    "profile_id,profile_name,variant,status,tp,fp,tn,fn,precision,recall,f1,accuracy,far,mdr,undefined,error";

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Splits one CSV record with RFC 4180 quoting. Returns false on an
// unterminated quote or junk after a closing quote.
bool split_quoted(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    std::size_t i = 0;
    while (true) {
        field.clear();
        if (i < line.size() && line[i] == '"') {
            ++i;
            while (true) {
                if (i >= line.size()) return false;
                if (line[i] == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                field += line[i++];
            }
            if (i < line.size() && line[i] != ',') return false;
        } else {
            while (i < line.size() && line[i] != ',') field += line[i++];
        }
        out.push_back(field);
        if (i >= line.size()) return true;
        ++i;  // comma
    }
}

std::string undefined_names(const MetricRow::Undefined& u) {
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (on) s += (s.empty() ? "" : ";") + std::string(name);
    };
    add(u.precision, "precision");
    add(u.recall, "recall");
    add(u.f1, "f1");
    add(u.far, "far");
    return s;
}

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
    return buf;
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

std::size_t Report::failures() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok; }));
}

std::vector<detect::VariantKind> Report::variants() const {
    std::vector<detect::VariantKind> out;
    for (auto k : {detect::VariantKind::Cae, detect::VariantKind::Cdae, detect::VariantKind::Csae})
        if (std::any_of(cells.begin(), cells.end(), [&](const auto& c) { return c.ok && c.variant == k; }))
            out.push_back(k);
    return out;
}

MetricRow Report::average(detect::VariantKind variant) const {
    std::vector<MetricRow> rows;
    for (const auto& c : cells)
        if (c.ok && c.variant == variant) rows.push_back(c.metrics);
    if (rows.empty()) throw DomainError("no successful cells for variant " + detect::to_string(variant));
    return aggregate(rows);
}

void sort_cells(std::vector<CellResult>& cells) {
    std::stable_sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
        return a.profile_id != b.profile_id ? a.profile_id < b.profile_id : a.variant < b.variant;
    });
}

std::string report_csv(const Report& report) {
    std::ostringstream out;
    for (const auto& [k, v] : report.metadata) {
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw DomainError("report metadata entry '" + k + "' cannot be serialized");
        out << "# " << k << '=' << v << '\n';
    }
    out << kHeader << '\n';
    for (const auto& c : report.cells) {
        const auto& m = c.metrics;
        out << c.profile_id << ',' << quote(c.profile_name) << ',' << detect::to_string(c.variant) << ','
            << (c.ok ? "ok" : "failed") << ',' << c.confusion.tp << ',' << c.confusion.fp << ',' << c.confusion.tn
            << ',' << c.confusion.fn << ',' << format_double(m.precision) << ',' << format_double(m.recall) << ','
            << format_double(m.f1) << ',' << format_double(m.accuracy) << ',' << format_double(m.far) << ','
            << format_double(m.mdr) << ',' << undefined_names(m.undefined) << ',' << quote(c.error) << '\n';
    }
    return out.str();
}

Report parse_report_csv(const std::string& text, const std::string& source) {
    Report r;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::vector<std::string> f;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (!header && line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError(source, lineno, "metadata line without '='");
            r.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
            continue;
        }
        if (!header) {
            if (line != kHeader) throw ParseError(source, lineno, "unexpected report header");
            header = true;
            continue;
        }
        if (line.empty()) continue;
        if (!split_quoted(line, f) || f.size() != 16) throw ParseError(source, lineno, "malformed report row");
        CellResult c;
        auto count = [&](const std::string& s, const char* what) {
            double v = 0;
            if (!parse_double(s, v) || v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
                throw ParseError(source, lineno, std::string("bad ") + what + " '" + s + "'");
            return static_cast<std::size_t>(v);
        };
        auto fraction = [&](const std::string& s, const char* what) {
            double v = 0;
            if (!parse_double(s, v)) throw ParseError(source, lineno, std::string("bad ") + what + " '" + s + "'");
            return v;
        };
        c.profile_id = static_cast<int>(count(f[0], "profile_id"));
        c.profile_name = f[1];
        try {
            c.variant = detect::parse_variant_kind(f[2]);
        } catch (const DomainError& e) {
            throw ParseError(source, lineno, e.what());
        }
        if (f[3] != "ok" && f[3] != "failed") throw ParseError(source, lineno, "status must be ok or failed");
        c.ok = f[3] == "ok";
        c.confusion = {count(f[4], "tp"), count(f[5], "fp"), count(f[6], "tn"), count(f[7], "fn")};
        c.metrics.precision = fraction(f[8], "precision");
        c.metrics.recall = fraction(f[9], "recall");
        c.metrics.f1 = fraction(f[10], "f1");
        c.metrics.accuracy = fraction(f[11], "accuracy");
        c.metrics.far = fraction(f[12], "far");
        c.metrics.mdr = fraction(f[13], "mdr");
        if (!f[14].empty())
            for (const auto& name : split_fields(f[14], ';')) {
                if (name == "precision") c.metrics.undefined.precision = true;
                else if (name == "recall") c.metrics.undefined.recall = true;
                else if (name == "f1") c.metrics.undefined.f1 = true;
                else if (name == "far") c.metrics.undefined.far = true;
                else throw ParseError(source, lineno, "unknown undefined flag '" + name + "'");
            }
        c.error = f[15];
        r.cells.push_back(std::move(c));
    }
    if (!header) throw ParseError(source, lineno, "missing report header");
    return r;
}

void save_report_csv(const std::string& path, const Report& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << report_csv(report);
    if (!out) throw IoError(path, "write failed");
}

Report load_report_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_report_csv(text.str(), path);
}

std::string report_text(const Report& report) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-4s %-16s %-6s %9s %9s %9s %9s %9s %9s\n", "id", "dataset", "model", "precision",
                  "recall", "f1", "accuracy", "far", "mdr");
    out << buf;
    for (const auto& c : report.cells) {
        if (!c.ok) {
            std::snprintf(buf, sizeof buf, "%-4d %-16s %-6s failed: ", c.profile_id, c.profile_name.c_str(),
                          upper(detect::to_string(c.variant)).c_str());
            out << buf << c.error << '\n';
            continue;
        }
        const auto& m = c.metrics;
        std::snprintf(buf, sizeof buf, "%-4d %-16s %-6s %9s %9s %9s %9s %9s %9s\n", c.profile_id,
                      c.profile_name.c_str(), upper(detect::to_string(c.variant)).c_str(), pct(m.precision).c_str(),
                      pct(m.recall).c_str(), pct(m.f1).c_str(), pct(m.accuracy).c_str(), pct(m.far).c_str(),
                      pct(m.mdr).c_str());
        out << buf;
    }
    out << "\naverages\n";
    for (auto k : report.variants()) {
        const auto m = report.average(k);
        std::snprintf(buf, sizeof buf, "%-27s %9s %9s %9s %9s %9s %9s\n", upper(detect::to_string(k)).c_str(),
                      pct(m.precision).c_str(), pct(m.recall).c_str(), pct(m.f1).c_str(), pct(m.accuracy).c_str(),
                      pct(m.far).c_str(), pct(m.mdr).c_str());
        out << buf;
    }
    if (const auto n = report.failures()) out << '\n' << n << " cell(s) failed\n";
    return out.str();
}

}  // namespace jamdet::eval
