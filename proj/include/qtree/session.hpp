#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtree/builder.hpp"
#include "qtree/instance.hpp"

namespace qtree {

// Service-level failures carry the HTTP status they map to.
class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

struct Answer {
    int query = -1;
    int bit = 0;
};

struct SessionState {
    enum class Status { awaiting_answer, identified, failed };

    std::string id;
    std::string instance_id;
    BuilderConfig config;
    ObjectSet remaining;
    std::vector<Answer> history;
    Status status = Status::awaiting_answer;
    int pending_query = -1;  // awaiting_answer
    int identified = -1;     // identified: object index or 0-based group index
    std::string failure;     // failed
    // Renormalized prior over `remaining`, same order.
    std::vector<double> posterior;
};

const char* to_string(SessionState::Status status);

struct RegisteredInstance {
    std::string id;
    std::string name;
    std::shared_ptr<const ProblemInstance> instance;
};

// In-memory registry of instances and live sessions. Instances optionally
// persist as <id>.json under a data directory. Each session has its own lock,
// so answers to one session are serialized while different sessions proceed
// independently.
class SessionStore {
public:
    using Clock = std::chrono::steady_clock;

    explicit SessionStore(std::optional<std::filesystem::path> data_dir = std::nullopt,
                          std::chrono::seconds idle_timeout = std::chrono::hours(1));

    std::string register_instance(ProblemInstance instance, std::string name = {});
    std::vector<RegisteredInstance> list_instances() const;
    RegisteredInstance get_instance(const std::string& id) const;

    SessionState create_session(const std::string& instance_id, const BuilderConfig& config);
    // expected_query, when given, must equal the pending query; a stale
    // submission is rejected with 409 instead of answering the next question.
    SessionState submit_answer(const std::string& session_id, int bit,
                               std::optional<int> expected_query = std::nullopt);
    SessionState get_session(const std::string& session_id);
    void delete_session(const std::string& session_id);

    // Drops sessions idle longer than the timeout; returns how many.
    std::size_t evict_idle(Clock::time_point now = Clock::now());
    std::size_t session_count() const;

private:
    struct Entry {
        std::mutex mutex;
        SessionState state;
        std::shared_ptr<const ProblemInstance> instance;
        Clock::time_point last_access;
    };

    std::shared_ptr<Entry> find_session(const std::string& id) const;
    void load_persisted();

    std::optional<std::filesystem::path> data_dir_;
    std::chrono::seconds idle_timeout_;

    mutable std::shared_mutex instances_mutex_;
    std::map<std::string, RegisteredInstance> instances_;
    std::uint64_t next_instance_ = 1;

    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t next_session_ = 1;
};

nlohmann::json session_to_json(const SessionState& state, const ProblemInstance& instance);

// Recomputes a session's state from its recorded answers alone.
SessionState replay_session(const ProblemInstance& instance, const BuilderConfig& config,
                            const std::vector<Answer>& answers);

}  // namespace qtree
