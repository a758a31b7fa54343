#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace ppset {

/**
 * Runs `/bin/sh -c command` once per program: the payload goes to stdin, the child must print
 * `1` or `0` (surrounding whitespace ignored) and exit 0 before the timeout.  Anything else
 * throws ExecutorError carrying the program index; a child past its deadline is killed with
 * its whole process group.
 */
class SubprocessExecutor {
public:
    SubprocessExecutor(std::string command, std::vector<std::string> payloads, std::chrono::milliseconds timeout);

    int operator()(std::size_t index) const;

private:
    std::string command_;
    std::vector<std::string> payloads_;
    std::chrono::milliseconds timeout_;
};

}  // namespace ppset
