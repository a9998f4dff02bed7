#pragma once

// Run configuration, deterministic file output, and the bounded-thread sweep
// helper shared by the command-line driver.
//
// Output discipline: every floating-point value is printed with 17
// significant digits, enough to round-trip an IEEE double, so a rerun that
// computes bit-equal numbers writes byte-equal data files.  Data files (CSV,
// certificates) carry no timestamps; run manifests do.

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "blowup/params.hpp"

namespace blowup::io {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

// ---------------------------------------------------------------------------
// RunConfig: the serializable description of one driver invocation
// ---------------------------------------------------------------------------

struct RunConfig {
    double p = 2.0;
    double delta = 100.0;
    double A = 20.0;
    double s0 = 12.0;
    std::array<double, 5> d{0.0, 0.0, 0.0, 0.0, 0.0};
    int quad_order = 48;
    int n_max = 16;
    double ds = 0.01;
    double window = 3.0;
    std::string output_dir = ".";
    bool seedless = true;  // all searches are deterministic; kept for the manifest

    Params params() const { return Params::make(p, delta, A, s0, d); }

    // Flat key = value text, keys in fixed order, values at full precision.
    std::string to_text() const {
        std::ostringstream os;
        os << "p = " << fmt17(p) << "\n";
        os << "delta = " << fmt17(delta) << "\n";
        os << "A = " << fmt17(A) << "\n";
        os << "s0 = " << fmt17(s0) << "\n";
        os << "d = " << fmt17(d[0]) << "," << fmt17(d[1]) << "," << fmt17(d[2]) << ","
           << fmt17(d[3]) << "," << fmt17(d[4]) << "\n";
        os << "quad_order = " << quad_order << "\n";
        os << "n_max = " << n_max << "\n";
        os << "ds = " << fmt17(ds) << "\n";
        os << "window = " << fmt17(window) << "\n";
        os << "output_dir = " << output_dir << "\n";
        os << "seedless = " << (seedless ? 1 : 0) << "\n";
        return os.str();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["p"] = fmt17(p);
        j["delta"] = fmt17(delta);
        j["A"] = fmt17(A);
        j["s0"] = fmt17(s0);
        j["d"] = {fmt17(d[0]), fmt17(d[1]), fmt17(d[2]), fmt17(d[3]), fmt17(d[4])};
        j["quad_order"] = quad_order;
        j["n_max"] = n_max;
        j["ds"] = fmt17(ds);
        j["window"] = fmt17(window);
        j["output_dir"] = output_dir;
        j["seedless"] = seedless;
        return j;
    }

    void set_key(const std::string& key, const std::string& value) {
        const auto num = [&]() {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            while (used < value.size() && std::isspace(static_cast<unsigned char>(value[used])))
                ++used;
            if (used != value.size())
                throw std::invalid_argument("config: malformed number '" + value + "'");
            return v;
        };
        if (key == "p") p = num();
        else if (key == "delta") delta = num();
        else if (key == "A") A = num();
        else if (key == "s0") s0 = num();
        else if (key == "d") {
            std::istringstream is(value);
            std::string part;
            std::vector<double> vals;
            while (std::getline(is, part, ',')) vals.push_back(std::stod(part));
            if (vals.size() != 5)
                throw std::invalid_argument("config: d needs 5 comma-separated reals");
            for (int i = 0; i < 5; ++i) d[i] = vals[i];
        } else if (key == "quad_order") quad_order = static_cast<int>(num());
        else if (key == "n_max" || key == "nmax") n_max = static_cast<int>(num());
        else if (key == "ds") ds = num();
        else if (key == "window") window = num();
        else if (key == "output_dir") output_dir = value;
        else if (key == "seedless") seedless = num() != 0.0;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
        RunConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto strip = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string();
                const auto b = s.find_last_not_of(" \t\r");
                return s.substr(a, b - a + 1);
            };
            if (strip(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                            " is not 'key = value'");
            cfg.set_key(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        }
        return cfg;
    }
};

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Bounded parallel sweep
// ---------------------------------------------------------------------------

inline int max_threads() {
    if (const char* env = std::getenv("BLOWUP_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// Runs f(i) for i in [0, n); the caller collects results into pre-sized
// storage indexed by i, so the output order (and the bytes written from it)
// does not depend on the thread count.
template <class F>
inline void parallel_for(int n, F&& f) {
    const int workers = std::min(max_threads(), n > 0 ? n : 1);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace blowup::io
