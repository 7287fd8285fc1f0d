#include "pbm/service/store.hpp"

#include "pbm/error.hpp"

namespace pbm::service {

RecordLog::RecordLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) {
        throw Error(ErrorKind::io, "cannot open record log: " + path_.string());
    }
}

void RecordLog::append(const nlohmann::json& record) {
    const std::string line = record.dump();
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
    out_.flush();
    if (!out_) {
        throw Error(ErrorKind::io, "write to record log failed: " + path_.string());
    }
}

std::vector<nlohmann::json> RecordLog::read_all() const {
    std::vector<nlohmann::json> records;
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error&) {
            if (in.peek() == std::char_traits<char>::eof()) {
                break;  // torn tail
            }
            throw Error(ErrorKind::parse_error,
                        path_.string() + ": corrupt record on line " + std::to_string(line_no));
        }
    }
    return records;
}

}  // namespace pbm::service
