#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace ragbench {

// FNV-1a 64-bit. Used for run ids and seeded placement decisions; stability
// across platforms matters more than hash quality here.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

// Deterministic RNG wrapper. std::shuffle and the distribution classes are
// implementation-defined, so reproducible runs use this hand-rolled
// Fisher-Yates + modulo draw instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    std::size_t below(std::size_t n) {
        return n == 0 ? 0 : static_cast<std::size_t>(next() % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = below(i + 1);
            using std::swap;
            swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

std::string read_file(const std::filesystem::path& p);

// Creates parent directories as needed.
void write_file(const std::filesystem::path& p, std::string_view content);

// Shortest round-trippable decimal representation ("%.17g" trimmed via %g).
std::string fmt_double(double v);

std::string lower_ascii(std::string_view s);

bool has_digit(std::string_view s);

}  // namespace ragbench
