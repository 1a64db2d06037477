#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "crowdstrata/text.hpp"

namespace testing {

inline const std::filesystem::path kData{CROWDSTRATA_TEST_DATA};

struct Invocation {
    int code = 0;
    std::string out;
    std::string err;
};

inline Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "crowdstrata");
    std::ostringstream out, err;
    Invocation r;
    r.code = crowdstrata::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("crowdstrata-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }
    [[nodiscard]] std::string write(const std::string& name, const std::string& text) const {
        crowdstrata::write_file(file(name), text);
        return file(name);
    }

private:
    std::filesystem::path path_;
};

inline std::string data(const std::string& name) { return (kData / name).string(); }
inline std::string slurp(const std::string& path) { return crowdstrata::read_file(path); }

}  // namespace testing
