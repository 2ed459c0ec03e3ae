#pragma once

// Running the CLI binary and handling scratch files in tests.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace proc {

namespace fs = std::filesystem;

struct ScratchDir {
    fs::path path;
    explicit ScratchDir(const std::string& tag) {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("carv_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

inline std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

inline int exit_code(int status) {
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

// Runs a shell command line; stdout and stderr go to the given files when set.
inline int shell(const std::string& cmd, const fs::path& out = {}, const fs::path& err = {}) {
    std::string line = cmd;
    line += " >" + (out.empty() ? std::string("/dev/null") : quote(out.string()));
    line += " 2>" + (err.empty() ? std::string("/dev/null") : quote(err.string()));
    return exit_code(std::system(line.c_str()));
}

inline int carv(const std::string& args, const fs::path& out = {}, const fs::path& err = {}) {
    return shell(quote(CARV_CLI_PATH) + " " + args, out, err);
}

inline std::string fixture(const std::string& name) {
    return quote((fs::path(CARV_FIXTURE_DIR) / name).string());
}

inline std::string schema(const std::string& name) {
    return (fs::path(CARV_SCHEMA_DIR) / name).string();
}

inline bool validate(const std::string& schema_name, const fs::path& doc) {
    return shell(std::string(CARV_VALIDATOR) + " " + quote(schema(schema_name)) + " " +
                 quote(doc.string())) == 0;
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace proc
