#include "jamdet/phy/iq_io.hpp"

#include "jamdet/error.hpp"
#include "jamdet/kv.hpp"
#include "jamdet/text.hpp"

#include <fstream>

namespace jamdet::phy {

std::string iq_meta_path(const std::string& path) { return path + ".meta"; }

void write_iq(const std::string& path, const IQBuffer& buf, const OfdmParams* params) {
    buf.validate();
    std::ofstream out(path);
    if (!out) throw IoError(path, "cannot open for writing");
    out << "i,q\n";
    for (const auto& s : buf.samples) out << format_double(s.real()) << ',' << format_double(s.imag()) << '\n';
    if (!out) throw IoError(path, "write failed");

    KeyValueFile meta;
    meta.set("sample_rate_hz", buf.sample_rate_hz);
    if (params) {
        meta.set("fft_size", static_cast<long long>(params->fft_size));
        meta.set("cp_len", static_cast<long long>(params->cp_len));
    }
    meta.save(iq_meta_path(path));
}

IqFile read_iq(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open for reading");
    IqFile file;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path, 1, "missing header");
    ++line_no;
    strip_cr(line);
    if (line != "i,q") throw ParseError(path, line_no, "expected header 'i,q'");
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        double re = 0.0, im = 0.0;
        if (fields.size() != 2) throw ParseError(path, line_no, "expected 2 fields, got " + std::to_string(fields.size()));
        if (!parse_double(fields[0], re) || !parse_double(fields[1], im))
            throw ParseError(path, line_no, "malformed number");
        file.buffer.samples.emplace_back(re, im);
    }
    if (file.buffer.samples.empty()) throw ParseError(path, line_no, "no samples");

    const auto meta = KeyValueFile::load(iq_meta_path(path));
    file.buffer.sample_rate_hz = meta.get_double("sample_rate_hz");
    if (meta.contains("fft_size")) file.fft_size = static_cast<std::size_t>(meta.get_int("fft_size"));
    if (meta.contains("cp_len")) file.cp_len = static_cast<std::size_t>(meta.get_int("cp_len"));
    file.buffer.validate();
    return file;
}

}  // namespace jamdet::phy
