#include "jamdet/ad/checkpoint.hpp"

#include "jamdet/error.hpp"
#include "jamdet/kv.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace jamdet::ad {

namespace {
constexpr const char* kMagic = "jamdet-checkpoint 1";
}

std::string serialize_parameters(const ParameterList& params) {
    std::string out = std::string(kMagic) + "\n";
    for (const auto& p : params) {
        if (p.name.empty() || p.name.find_first_of(" \t\n") != std::string::npos)
            throw DomainError("checkpoint names must be non-empty and free of whitespace: '" + p.name + "'");
        const auto& shape = p.tensor.shape();
        out += p.name + " " + (p.trainable ? "1" : "0") + " " + std::to_string(shape.size());
        for (auto d : shape) out += " " + std::to_string(d);
        out += "\n";
        const auto v = p.tensor.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += " ";
            out += format_double(v[i]);
        }
        out += "\n";
    }
    return out;
}

ParameterList parse_parameters(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || line != kMagic) throw ParseError(source, 1, "not a jamdet checkpoint");
    ParameterList out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream header(line);
        NamedTensor p;
        int trainable = 0;
        std::size_t rank = 0;
        if (!(header >> p.name >> trainable >> rank) || rank == 0)
            throw ParseError(source, lineno, "malformed tensor header");
        Shape shape(rank);
        for (auto& d : shape)
            if (!(header >> d) || d == 0) throw ParseError(source, lineno, "malformed shape");
        std::string values_line;
        if (!std::getline(in, values_line)) throw ParseError(source, lineno + 1, "missing values");
        ++lineno;
        std::vector<double> values;
        values.reserve(numel(shape));
        const char* cur = values_line.c_str();
        while (*cur) {
            char* end = nullptr;
            const double v = std::strtod(cur, &end);
            if (end == cur) {
                if (*cur == ' ') {
                    ++cur;
                    continue;
                }
                throw ParseError(source, lineno, "malformed value");
            }
            values.push_back(v);
            cur = end;
        }
        if (values.size() != numel(shape))
            throw ParseError(source, lineno, "expected " + std::to_string(numel(shape)) + " values, got " +
                                                 std::to_string(values.size()));
        p.trainable = trainable != 0;
        p.tensor = Tensor::from(std::move(shape), std::move(values), p.trainable);
        out.push_back(std::move(p));
    }
    return out;
}

void save_checkpoint(const std::string& path, const ParameterList& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << serialize_parameters(params);
    if (!out) throw IoError(path, "write failed");
}

ParameterList load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_parameters(ss.str(), path);
}

void assign_parameters(const ParameterList& target, const ParameterList& source) {
    std::map<std::string, const NamedTensor*> by_name;
    for (const auto& s : source) by_name[s.name] = &s;
    for (const auto& t : target) {
        const auto it = by_name.find(t.name);
        if (it == by_name.end()) throw DomainError("checkpoint lacks parameter '" + t.name + "'");
        if (it->second->tensor.shape() != t.tensor.shape())
            throw ShapeError("parameter '" + t.name + "': checkpoint shape " + to_string(it->second->tensor.shape()) +
                             " vs model shape " + to_string(t.tensor.shape()));
        Tensor dst = t.tensor;
        const auto src = it->second->tensor.values();
        std::copy(src.begin(), src.end(), dst.mutable_values().begin());
    }
}

}  // namespace jamdet::ad
