#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmm/biortho.hpp"
#include "cmm/quadrature.hpp"
#include "cmm/workspace.hpp"

namespace cmm {

// Writes to a sibling temporary file and renames it over the target. Throws IoError.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::optional<std::string> read_text(const std::filesystem::path& path);

// Cache files are text:
//   line 1  "cmm-cache <version> <kind>"
//   line 2  "checksum <FNV-1a 64 of the body, hex>"
//   body    one "name values..." record per line, doubles in hexfloat
inline constexpr int kCacheVersion = 1;

std::string bimoment_cache_key(const ModelSpec& model, int degree, int order);
std::string system_cache_key(const std::string& bimoment_key, const FactorizeOptions& opts);

std::string serialize_bimoments(const BimomentMatrix& bm, const std::string& key);
std::string serialize_system(const BiorthogonalSystem& sys, const std::string& key);
// Return nullopt (with a reason) on any header, checksum, key or parse mismatch.
std::optional<BimomentMatrix> parse_bimoments(const std::string& text, const std::string& key, std::string* reason);
std::optional<BiorthogonalSystem> parse_system(const std::string& text, const std::string& key, std::string* reason);

struct CacheLog {
    std::vector<std::string> lines;
    bool bimoment_hit = false;
    bool system_hit = false;
    std::string bimoment_key, system_key;
};

class Cache {
public:
    explicit Cache(std::filesystem::path dir) : dir_(std::move(dir)) {}
    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path bimoment_path(const std::string& key) const { return dir_ / ("bimoments-" + key + ".txt"); }
    std::filesystem::path system_path(const std::string& key) const { return dir_ / ("system-" + key + ".txt"); }

    // Loads both artifacts when present and intact, recomputing (and rewriting) whatever is missing or corrupt.
    Workspace load_or_build(const ModelSpec& model, const WorkspaceOptions& opts, CacheLog* log = nullptr) const;

private:
    std::filesystem::path dir_;
};

}  // namespace cmm
