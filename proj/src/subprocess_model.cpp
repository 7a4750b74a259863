#include "xai/subprocess_model.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <mutex>

#include <json.hpp>

#include "xai/error.hpp"

namespace xai {

namespace {

class ChildProcess {
public:
    explicit ChildProcess(const std::string& command) {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw model_error("spawn_external: pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw model_error("spawn_external: fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            std::perror("exec");
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        write_fd_ = to_child[1];
        read_stream_ = fdopen(from_child[0], "r");
        if (!read_stream_) throw model_error("spawn_external: fdopen failed");
    }

    ~ChildProcess() {
        if (pid_ > 0) {
            try { send_line(R"({"type":"shutdown"})"); } catch (...) {}
            if (write_fd_ >= 0) close(write_fd_);
            write_fd_ = -1;
            int status = 0;
            waitpid(pid_, &status, 0);
        }
        if (read_stream_) fclose(read_stream_);
        if (write_fd_ >= 0) close(write_fd_);
    }

    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    void send_line(const std::string& line) {
        std::string payload = line + "\n";
        std::size_t off = 0;
        while (off < payload.size()) {
            const ssize_t n = write(write_fd_, payload.data() + off, payload.size() - off);
            if (n <= 0) throw model_error("subprocess model: child pipe closed while writing");
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(long long id) {
        std::string line;
        int ch;
        while ((ch = fgetc(read_stream_)) != EOF && ch != '\n') line += static_cast<char>(ch);
        if (ch == EOF && line.empty())
            throw model_error("subprocess model: child exited before replying to request id " +
                              std::to_string(id));
        return line;
    }

    nlohmann::json request(const nlohmann::json& msg, long long id) {
        std::lock_guard<std::mutex> lock(mutex_);  // one request in flight
        send_line(msg.dump());
        const std::string line = read_line(id);
        nlohmann::json reply = nlohmann::json::parse(line, nullptr, false);
        if (reply.is_discarded())
            throw model_error("subprocess model: invalid JSON reply to request id " +
                              std::to_string(id) + ": " + line.substr(0, 200));
        return reply;
    }

    long long next_id() { return ++last_id_; }

private:
    pid_t pid_ = -1;
    int write_fd_ = -1;
    FILE* read_stream_ = nullptr;
    std::mutex mutex_;
    long long last_id_ = 0;
};

}  // namespace

ModelHandle spawn_external(const std::string& command) {
    auto child = std::make_shared<ChildProcess>(command);

    nlohmann::json spec_reply = child->request(nlohmann::json{{"type", "spec"}}, 0);
    if (spec_reply.value("type", "") != "spec" || !spec_reply.contains("task") ||
        !spec_reply.contains("n_outputs"))
        throw model_error("subprocess model: handshake failed, got: " + spec_reply.dump());

    ModelHandle h;
    h.task = task_from_name(spec_reply["task"].get<std::string>());
    h.n_outputs = spec_reply["n_outputs"].get<std::size_t>();
    h.input_dim = 0;  // width determined by the child
    h.kind = "external";
    h.params = nlohmann::json{{"command", command}};
    h.predict_fn = [child, n_outputs = h.n_outputs](const Matrix& x) {
        const long long id = child->next_id();
        nlohmann::json inputs = nlohmann::json::array();
        for (std::size_t r = 0; r < x.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (double v : x.row(r)) row.push_back(v);
            inputs.push_back(std::move(row));
        }
        nlohmann::json msg{{"type", "predict"}, {"id", id}, {"inputs", inputs}};
        nlohmann::json reply = child->request(msg, id);
        if (reply.value("type", "") != "predict" || reply.value("id", -1LL) != id ||
            !reply.contains("outputs"))
            throw model_error("subprocess model: protocol error for request id " +
                              std::to_string(id) + ": " + reply.dump().substr(0, 200));
        const auto& outputs = reply["outputs"];
        if (!outputs.is_array() || outputs.size() != x.rows)
            throw model_error("subprocess model: request id " + std::to_string(id) + " returned " +
                              std::to_string(outputs.size()) + " rows, expected " +
                              std::to_string(x.rows));
        Matrix out(x.rows, n_outputs);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const auto& row = outputs[r];
            if (!row.is_array() || row.size() != n_outputs)
                throw model_error("subprocess model: request id " + std::to_string(id) +
                                  " row width mismatch");
            for (std::size_t c = 0; c < n_outputs; ++c) out.at(r, c) = row[c].get<double>();
        }
        return out;
    };
    return h;
}

}  // namespace xai
