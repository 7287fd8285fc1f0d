#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include <nlohmann/json.hpp>

namespace pbm::service {

/// Append-only newline-delimited JSON log. Each append is flushed before it
/// returns; a torn final line (crash mid-write) is ignored on read.
class RecordLog {
public:
    explicit RecordLog(std::filesystem::path path);

    void append(const nlohmann::json& record);
    std::vector<nlohmann::json> read_all() const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mutex_;
};

}  // namespace pbm::service
