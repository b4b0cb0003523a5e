#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "linereconf/optimizer.hpp"

namespace linereconf::detail {

std::map<std::string, std::size_t> agent_index(const InitProblem& p);

// Number of maximal runs of operations in which the agent holds a share.
int runs_of(const LineConfiguration& c, const std::string& agent);

// Busy time per used agent computed from the problem's expected times.
std::map<std::string, double> busy_times(const InitProblem& p, const LineConfiguration& c);

// Fills usage, station times, bottleneck and agent count from the assignment.
void summarize(const InitProblem& p, Solution& s);

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace linereconf::detail
