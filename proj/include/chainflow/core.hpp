#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chainflow {

// A single rule violation found by a validator. Violations are data, not
// exceptions: callers collect them and decide what to do.
struct Violation {
    std::string code;     // stable machine-readable code, e.g. "graph-not-dag"
    std::string subject;  // offending ids, comma separated
    std::string message;  // human-readable explanation
    double residual = 0.0;
};

inline std::string violation_line(const Violation& v) {
    return v.code + "\t" + v.subject + "\t" + v.message;
}

class ChainflowError : public std::runtime_error {
  public:
    explicit ChainflowError(const std::string& what) : std::runtime_error(what) {}
};

// Printed numbers in reports and data files all go through one formatter so
// repeated runs emit byte-identical text.
inline std::string fmt_num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

inline std::string fmt_num_exact(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ChainflowError("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write-temp-then-rename so partially written reports never replace good ones.
inline void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ChainflowError("cannot open file for writing: " + tmp);
        out << content;
        if (!out) throw ChainflowError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ChainflowError("rename failed: " + tmp + " -> " + path);
}

// SplitMix64 step; the workhorse for seed derivation and sampling streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Order-sensitive combination of two 64-bit values into a fresh seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s = h ^ (b + 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Master seed used when neither a flag nor a config provides one. The
// CHAINFLOW_SEED environment variable overrides the built-in default.
inline std::uint64_t default_master_seed() {
    if (const char* env = std::getenv("CHAINFLOW_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0') return static_cast<std::uint64_t>(v);
    }
    return 42;
}

}  // namespace chainflow
