#include "hdlgen/sim_harness.hpp"

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

namespace hdlgen::sim {

namespace fs = std::filesystem;

std::string to_string(SimStatus s) {
    switch (s) {
    case SimStatus::Passed: return "Passed";
    case SimStatus::PartialFail: return "PartialFail";
    case SimStatus::CompileError: return "CompileError";
    case SimStatus::RuntimeError: return "RuntimeError";
    case SimStatus::Timeout: return "Timeout";
    }
    return "?";
}

std::optional<PassRate> parse_pass_rate(const std::string& stdout_text,
                                        const std::string& pattern) {
    std::regex re(pattern);
    std::smatch m;
    if (!std::regex_search(stdout_text, m, re) || m.size() < 3)
        return std::nullopt;
    long long x = std::stoll(m[1].str());
    long long y = std::stoll(m[2].str());
    if (x > y)
        throw ValueError("malformed mismatch counts: " + std::to_string(x) + " > " +
                         std::to_string(y));
    if (y == 0)
        return std::nullopt;
    return PassRate(y - x, y);
}

namespace {

struct ExecResult {
    int exit_code = -1;
    bool timed_out = false;
    int exec_errno = 0;   // nonzero when the executable could not be started
};

ExecResult run_process(const std::vector<std::string>& argv, const fs::path& workdir,
                       const fs::path& out_file, const fs::path& err_file, int timeout_seconds) {
    int errpipe[2];
    if (pipe2(errpipe, O_CLOEXEC) != 0)
        throw std::runtime_error("pipe2 failed");

    pid_t pid = fork();
    if (pid < 0)
        throw std::runtime_error("fork failed");

    if (pid == 0) {
        setpgid(0, 0);
        if (chdir(workdir.c_str()) != 0)
            _exit(126);
        int out_fd = open(out_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        int err_fd = open(err_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (out_fd < 0 || err_fd < 0)
            _exit(126);
        dup2(out_fd, STDOUT_FILENO);
        dup2(err_fd, STDERR_FILENO);

        std::vector<char*> cargv;
        for (const auto& a : argv)
            cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        int err = errno;
        ssize_t ignored = write(errpipe[1], &err, sizeof err);
        (void)ignored;
        _exit(127);
    }

    close(errpipe[1]);
    ExecResult result;

    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
    int status = 0;
    for (;;) {
        pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid)
            break;
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }

    int child_errno = 0;
    if (read(errpipe[0], &child_errno, sizeof child_errno) == sizeof child_errno)
        result.exec_errno = child_errno;
    close(errpipe[0]);

    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else
        result.exit_code = -1;
    return result;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::vector<std::string> expand_argv(const std::vector<std::string>& templ,
                                     const std::map<std::string, std::string>& single,
                                     const std::vector<std::string>& files) {
    std::vector<std::string> argv;
    for (const auto& t : templ) {
        if (t == "{files}") {
            argv.insert(argv.end(), files.begin(), files.end());
            continue;
        }
        std::string a = t;
        for (const auto& [key, value] : single) {
            std::string placeholder = "{" + key + "}";
            for (std::size_t pos; (pos = a.find(placeholder)) != std::string::npos;)
                a.replace(pos, placeholder.size(), value);
        }
        argv.push_back(a);
    }
    return argv;
}

} // namespace

bool simulator_available(const SimConfig& cfg) {
    if (cfg.compile_cmd.empty())
        return false;
    std::string bin = cfg.compile_cmd.front();
    if (const char* override_bin = std::getenv("SIM_BIN"))
        bin = override_bin;
    if (bin.find('/') != std::string::npos)
        return access(bin.c_str(), X_OK) == 0;
    const char* path = std::getenv("PATH");
    if (!path)
        return false;
    std::stringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':'))
        if (!dir.empty() && access((dir + "/" + bin).c_str(), X_OK) == 0)
            return true;
    return false;
}

SimOutcome ProcessSimRunner::compile_and_run(const std::string& dut_src, const Task& task,
                                             const fs::path& workdir) {
    auto start = std::chrono::steady_clock::now();
    // The child chdirs into the workdir, so every path handed to it must
    // survive that: absolutize once here.
    fs::create_directories(workdir);
    const fs::path abs_workdir = fs::absolute(workdir);

    // byte-exact write-through of both sources
    {
        std::ofstream dut(abs_workdir / "dut.v", std::ios::binary | std::ios::trunc);
        dut << dut_src;
        std::ofstream tb(abs_workdir / "tb.v", std::ios::binary | std::ios::trunc);
        tb << task.testbench_src;
    }

    std::map<std::string, std::string> vars{
        {"dut", "dut.v"}, {"tb", "tb.v"}, {"out", "sim.out"}};
    std::vector<std::string> files{"dut.v", "tb.v"};

    auto compile_argv = expand_argv(cfg_.compile_cmd, vars, files);
    if (const char* override_bin = std::getenv("SIM_BIN"); override_bin && !compile_argv.empty())
        compile_argv[0] = override_bin;

    SimOutcome outcome;
    auto finish = [&](SimStatus status) {
        outcome.status = status;
        outcome.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return outcome;
    };

    auto compile_res = run_process(compile_argv, abs_workdir, abs_workdir / "stdout.log",
                                   abs_workdir / "stderr.log", cfg_.timeout_seconds);
    if (compile_res.exec_errno != 0)
        throw SimulatorMissing("cannot start simulator '" + compile_argv[0] +
                               "': " + std::strerror(compile_res.exec_errno));
    if (compile_res.timed_out)
        return finish(SimStatus::Timeout);
    if (compile_res.exit_code != 0) {
        outcome.stderr_text = read_file(abs_workdir / "stderr.log");
        outcome.stdout_text = read_file(abs_workdir / "stdout.log");
        return finish(SimStatus::CompileError);
    }

    auto run_argv = expand_argv(cfg_.run_cmd, vars, files);
    auto run_res = run_process(run_argv, abs_workdir, abs_workdir / "stdout.log",
                               abs_workdir / "stderr.log", cfg_.timeout_seconds);
    if (run_res.exec_errno != 0)
        throw SimulatorMissing("cannot start simulator runtime '" + run_argv[0] +
                               "': " + std::strerror(run_res.exec_errno));
    outcome.stdout_text = read_file(abs_workdir / "stdout.log");
    outcome.stderr_text = read_file(abs_workdir / "stderr.log");
    if (run_res.timed_out)
        return finish(SimStatus::Timeout);

    std::optional<PassRate> pr;
    try {
        pr = parse_pass_rate(outcome.stdout_text, cfg_.mismatch_pattern);
    } catch (const ValueError&) {
        return finish(SimStatus::RuntimeError);
    }
    if (!pr)
        return finish(SimStatus::RuntimeError);
    outcome.pass_rate = pr;
    return finish(pr->full_pass() ? SimStatus::Passed : SimStatus::PartialFail);
}

} // namespace hdlgen::sim
