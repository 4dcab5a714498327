#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace laysum::cli {

enum class UsageErrorKind { UnknownSubcommand, UnknownFlag, MissingRequiredFlag, BadValue, HelpRequested };

/// Command-line misuse. Maps to exit code 1; `help()` is the text to show.
class UsageError : public std::runtime_error {
public:
    UsageError(UsageErrorKind kind, const std::string& message, std::string help);
    UsageErrorKind kind() const noexcept { return kind_; }
    const std::string& help() const noexcept { return help_; }

private:
    UsageErrorKind kind_;
    std::string help_;
};

struct CliInvocation {
    std::string subcommand;
    std::map<std::string, std::string> flags;  // boolean flags hold "true"
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Subcommand names in help order.
const std::vector<std::string>& subcommand_names();

/// `args` excludes the program name. Throws UsageError.
CliInvocation parse_args(std::span<const std::string> args);

/// Runs a parsed invocation. Runtime failures print one line to `err` and
/// return kExitRuntime.
int dispatch(const CliInvocation& inv, std::ostream& out, std::ostream& err);

/// parse_args + dispatch with the exit-code contract applied.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace laysum::cli
