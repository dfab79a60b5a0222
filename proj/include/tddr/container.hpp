#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tddr/common.hpp"

namespace tddr {

// Self-describing container: magic "TDDR1\n", UTF-8 key:value header lines
// terminated by a blank line, then the concatenated row-major little-endian
// payloads in header order. Complex elements are interleaved (re, im) pairs.
//
//   TDDR1
//   endian:little
//   meta:<key>=<value>
//   tensor:<name> <dtype> <d0>x<d1>x...
//   <blank line>
//   <payload>
//
// dtype is one of f32, f64, c64, c128.
struct NamedTensor {
    std::string name;
    std::string dtype;  // f32 | f64 | c64 | c128
    std::vector<int> shape;
    std::vector<double> f64;  // f64/c128 payload (complex interleaved)
    std::vector<float> f32;   // f32/c64 payload

    bool is_complex() const { return dtype == "c64" || dtype == "c128"; }
    bool is_double() const { return dtype == "f64" || dtype == "c128"; }

    long long elements() const {
        long long n = 1;
        for (int e : shape) n *= e;
        return is_complex() ? 2 * n : n;
    }

    size_t byte_size() const {
        return static_cast<size_t>(elements()) * (is_double() ? sizeof(double) : sizeof(float));
    }
};

struct Container {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<NamedTensor> tensors;

    const NamedTensor& get(const std::string& name) const {
        for (const NamedTensor& t : tensors)
            if (t.name == name) return t;
        throw io_error("container: no tensor named '" + name + "'");
    }
    bool has(const std::string& name) const {
        for (const NamedTensor& t : tensors)
            if (t.name == name) return true;
        return false;
    }
    std::string meta_value(const std::string& key, const std::string& fallback = "") const {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        return fallback;
    }
};

namespace detail {

inline void validate_container(const Container& c) {
    for (size_t i = 0; i < c.tensors.size(); ++i) {
        const NamedTensor& t = c.tensors[i];
        if (t.name.empty() || t.name.find_first_of(" \n\t") != std::string::npos)
            throw io_error("container: invalid tensor name '" + t.name + "'");
        if (t.dtype != "f32" && t.dtype != "f64" && t.dtype != "c64" && t.dtype != "c128")
            throw io_error("container: unsupported element type '" + t.dtype + "'");
        if (t.shape.empty()) throw io_error("container: tensor '" + t.name + "' has no shape");
        for (int e : t.shape)
            if (e <= 0) throw io_error("container: tensor '" + t.name + "' has nonpositive extent");
        const size_t stored = t.is_double() ? t.f64.size() : t.f32.size();
        if (stored != static_cast<size_t>(t.elements()))
            throw io_error("container: tensor '" + t.name + "' payload does not match shape");
        for (size_t j = 0; j < i; ++j)
            if (c.tensors[j].name == t.name)
                throw io_error("container: duplicate tensor name '" + t.name + "'");
    }
    for (const auto& [k, v] : c.meta)
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw io_error("container: metadata keys/values must be single-line");
}

}  // namespace detail

inline void write_container(const std::string& path, const Container& c) {
    detail::validate_container(c);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("container: cannot open '" + tmp + "' for writing");
        out << "TDDR1\n";
        out << "endian:little\n";
        for (const auto& [k, v] : c.meta) out << "meta:" << k << "=" << v << "\n";
        for (const NamedTensor& t : c.tensors) {
            out << "tensor:" << t.name << " " << t.dtype << " ";
            for (size_t i = 0; i < t.shape.size(); ++i) out << (i ? "x" : "") << t.shape[i];
            out << "\n";
        }
        out << "\n";
        for (const NamedTensor& t : c.tensors) {
            if (t.is_double())
                out.write(reinterpret_cast<const char*>(t.f64.data()), t.byte_size());
            else
                out.write(reinterpret_cast<const char*>(t.f32.data()), t.byte_size());
        }
        if (!out) throw io_error("container: write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw io_error("container: cannot move '" + tmp + "' into place");
}

inline Container read_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("container: cannot open '" + path + "'");
    std::string magic(6, '\0');
    in.read(magic.data(), 6);
    if (in.gcount() != 6 || magic != "TDDR1\n")
        throw io_error("container: '" + path + "' is not a container (bad magic)");

    Container c;
    std::string line;
    bool saw_endian = false;
    while (std::getline(in, line)) {
        if (line.empty()) break;
        if (line.rfind("endian:", 0) == 0) {
            if (line != "endian:little")
                throw io_error("container: unsupported byte order '" + line.substr(7) + "'");
            saw_endian = true;
        } else if (line.rfind("meta:", 0) == 0) {
            const std::string body = line.substr(5);
            const size_t eq = body.find('=');
            if (eq == std::string::npos) throw io_error("container: malformed metadata line");
            c.meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
        } else if (line.rfind("tensor:", 0) == 0) {
            const std::string body = line.substr(7);
            const size_t sp1 = body.find(' ');
            const size_t sp2 = body.find(' ', sp1 + 1);
            if (sp1 == std::string::npos || sp2 == std::string::npos)
                throw io_error("container: malformed tensor line");
            NamedTensor t;
            t.name = body.substr(0, sp1);
            t.dtype = body.substr(sp1 + 1, sp2 - sp1 - 1);
            std::string dims = body.substr(sp2 + 1);
            size_t pos = 0;
            while (pos < dims.size()) {
                size_t next = dims.find('x', pos);
                if (next == std::string::npos) next = dims.size();
                try {
                    t.shape.push_back(std::stoi(dims.substr(pos, next - pos)));
                } catch (const std::exception&) {
                    throw io_error("container: malformed tensor shape");
                }
                pos = next + 1;
            }
            if (t.dtype != "f32" && t.dtype != "f64" && t.dtype != "c64" && t.dtype != "c128")
                throw io_error("container: unsupported element type '" + t.dtype + "'");
            c.tensors.push_back(std::move(t));
        } else {
            throw io_error("container: unrecognized header line '" + line + "'");
        }
    }
    if (!saw_endian) throw io_error("container: missing endian declaration");
    if (in.eof() && !c.tensors.empty()) throw io_error("container: header not terminated");

    for (NamedTensor& t : c.tensors) {
        if (t.is_double()) {
            t.f64.resize(static_cast<size_t>(t.elements()));
            in.read(reinterpret_cast<char*>(t.f64.data()), t.byte_size());
        } else {
            t.f32.resize(static_cast<size_t>(t.elements()));
            in.read(reinterpret_cast<char*>(t.f32.data()), t.byte_size());
        }
        if (static_cast<size_t>(in.gcount()) != t.byte_size())
            throw io_error("container: payload length mismatch (truncated at tensor '" + t.name + "')");
    }
    in.peek();
    if (!in.eof()) throw io_error("container: payload length mismatch (trailing bytes)");
    return c;
}

}  // namespace tddr
