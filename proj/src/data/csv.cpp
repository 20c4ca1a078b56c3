#include "jamdet/data/csv.hpp"

#include "jamdet/error.hpp"
#include "jamdet/text.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace jamdet::data {

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    return s;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& source, const std::string& key) {
    std::vector<double> out;
    if (s.empty()) return out;
    for (const auto& f : split_fields(s)) {
        double v = 0.0;
        if (!parse_double(f, v)) throw ParseError(source, 0, "malformed number in '" + key + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

std::string manifest_path(const std::string& csv_path) { return csv_path + ".manifest"; }

std::string to_csv(const Dataset& ds) {
    ds.validate();
    std::ostringstream out;
    const std::size_t q = ds.feature_dim();
    for (std::size_t j = 0; j < q; ++j) out << 'f' << j << ',';
    out << "label\n";
    for (const auto& o : ds.observations) {
        for (double v : o.features) out << format_double(v) << ',';
        out << o.label << '\n';
    }
    return out.str();
}

Dataset parse_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
    strip_cr(line);
    const auto header = split_fields(line);
    if (header.size() < 2 || header.back() != "label") throw ParseError(source, 1, "header must end with 'label'");
    const std::size_t q = header.size() - 1;
    for (std::size_t j = 0; j < q; ++j)
        if (header[j] != "f" + std::to_string(j))
            throw ParseError(source, 1, "expected column 'f" + std::to_string(j) + "', got '" + header[j] + "'");

    Dataset ds;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != q + 1)
            throw ParseError(source, line_no,
                             "expected " + std::to_string(q + 1) + " fields, got " + std::to_string(fields.size()));
        SSBObservation o;
        o.features.resize(q);
        for (std::size_t j = 0; j < q; ++j) {
            if (!parse_double(fields[j], o.features[j]))
                throw ParseError(source, line_no, "malformed value in column f" + std::to_string(j));
            if (!std::isfinite(o.features[j]) || o.features[j] < 0.0)
                throw ParseError(source, line_no, "feature f" + std::to_string(j) + " must be finite and >= 0");
        }
        if (fields[q] == "0")
            o.label = kNonJammed;
        else if (fields[q] == "1")
            o.label = kJammed;
        else
            throw ParseError(source, line_no, "label must be 0 or 1, got '" + fields[q] + "'");
        ds.observations.push_back(std::move(o));
    }
    if (ds.observations.empty()) throw ParseError(source, line_no, "no data rows");
    return ds;
}

KeyValueFile make_manifest(const Dataset& ds) {
    const std::size_t real = ds.real_count();
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.observations[i].synthetic != (i >= real))
            throw StateError("synthetic rows must follow all real rows to be recorded in a manifest");
    KeyValueFile m;
    m.set("profile.id", ds.profile.id);
    m.set("profile.name", ds.profile.name);
    m.set("profile.total", static_cast<long long>(ds.profile.total));
    m.set("profile.jammed", static_cast<long long>(ds.profile.jammed));
    m.set("profile.non_jammed", static_cast<long long>(ds.profile.non_jammed));
    m.set("seed", std::to_string(ds.seed));
    m.set("snr_min_db", ds.snr_min_db);
    m.set("snr_max_db", ds.snr_max_db);
    m.set("q", static_cast<long long>(ds.feature_dim()));
    m.set("rows", static_cast<long long>(ds.size()));
    m.set("real_rows", static_cast<long long>(real));
    m.set("normalized", ds.normalized);
    m.set("order", std::string("awgn,featurize,normalize"));
    if (ds.normalized) {
        m.set("norm.min", join_doubles(ds.norm_stats.min));
        m.set("norm.max", join_doubles(ds.norm_stats.max));
    }
    return m;
}

void save_csv(const Dataset& ds, const std::string& path) {
    const auto manifest = make_manifest(ds);
    const auto text = to_csv(ds);
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError(path, "cannot open for writing");
        out << text;
        if (!out) throw IoError(path, "write failed");
    }
    manifest.save(manifest_path(path));
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    Dataset ds = parse_csv(buf.str(), path);

    const auto mpath = manifest_path(path);
    if (!std::filesystem::exists(mpath)) return ds;
    const auto m = KeyValueFile::load(mpath);
    ds.profile.id = static_cast<int>(m.get_int_or("profile.id", 0));
    ds.profile.name = m.get_or("profile.name", "");
    ds.profile.total = static_cast<std::size_t>(m.get_int_or("profile.total", 0));
    ds.profile.jammed = static_cast<std::size_t>(m.get_int_or("profile.jammed", 0));
    ds.profile.non_jammed = static_cast<std::size_t>(m.get_int_or("profile.non_jammed", 0));
    ds.seed = std::stoull(m.get_or("seed", "0"));
    ds.snr_min_db = m.get_double_or("snr_min_db", 0.0);
    ds.snr_max_db = m.get_double_or("snr_max_db", 0.0);
    ds.normalized = m.get_bool_or("normalized", false);
    if (static_cast<std::size_t>(m.get_int_or("q", static_cast<long long>(ds.feature_dim()))) != ds.feature_dim())
        throw ParseError(mpath, 0, "manifest q does not match the CSV header");
    const auto real = static_cast<std::size_t>(m.get_int_or("real_rows", static_cast<long long>(ds.size())));
    if (real > ds.size()) throw ParseError(mpath, 0, "real_rows exceeds the row count");
    for (std::size_t i = real; i < ds.size(); ++i) ds.observations[i].synthetic = true;
    if (ds.normalized) {
        ds.norm_stats.min = parse_doubles(m.get("norm.min"), mpath, "norm.min");
        ds.norm_stats.max = parse_doubles(m.get("norm.max"), mpath, "norm.max");
    }
    try {
        ds.validate();
    } catch (const DomainError& e) {
        throw ParseError(path, 0, e.what());
    }
    return ds;
}

}  // namespace jamdet::data
