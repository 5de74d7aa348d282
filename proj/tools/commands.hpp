#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ksigma::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kNoConvergence = 2, kBadInput = 3 };

struct SigmaArgs {
    std::string lambda;   // comma separated
    std::string csv;      // one lambda per row
    int k = 1;
    std::string json_out;
};

struct ClassifyArgs {
    std::string profile;
    int n = 3;
    int k = 2;
    double eps_class = 0.05;
    double c_fd = 10.0;
    std::string json_out;
};

struct SolveArgs {
    std::string problem;
    std::string out_dir = ".";
    int levels = 9;
};

struct ContinueArgs {
    std::string problem;
    std::string out_dir = ".";
};

struct EnvelopeArgs {
    std::string grid;
    std::vector<double> center{0.0, 0.0, 0.0};
    int n = 3;
    int k = 2;
    double tau_cells = 10.0;
    double r_start = 0.0;
    std::string out_dir = ".";
};

struct HarnackArgs {
    std::string grid;
    std::string radial;
    int n = 3;
    int k = 2;
    std::size_t max_nodes = 20000;
    std::string json_out;
};

struct VolumeArgs {
    std::string metric;
    std::string out_dir = ".";
};

struct VerifyArgs {
    std::uint64_t seed = 7;
    int trials = 1000;
    std::string json_out;
};

int cmd_sigma(const SigmaArgs& a);
int cmd_classify(const ClassifyArgs& a);
int cmd_solve(const SolveArgs& a);
int cmd_continue(const ContinueArgs& a);
int cmd_envelope(const EnvelopeArgs& a);
int cmd_harnack(const HarnackArgs& a);
int cmd_volume(const VolumeArgs& a);
int cmd_verify(const VerifyArgs& a);

}  // namespace ksigma::cli
