#include "qtree/session.hpp"

#include <algorithm>
#include <fstream>

#include "qtree/io.hpp"

namespace qtree {

using nlohmann::json;

const char* to_string(SessionState::Status status) {
    switch (status) {
        case SessionState::Status::awaiting_answer:
            return "awaiting-answer";
        case SessionState::Status::identified:
            return "identified";
        case SessionState::Status::failed:
            return "failed";
    }
    return "unknown";
}

namespace {

void refresh_posterior(SessionState& state, const ProblemInstance& instance) {
    state.posterior.clear();
    const double total = instance.mass(state.remaining);
    for (int i : state.remaining) {
        // A massless remainder gets a uniform posterior so it still sums to 1.
        state.posterior.push_back(total > 0.0 ? instance.prior[i] / total
                                              : 1.0 / static_cast<double>(state.remaining.size()));
    }
}

void advance(SessionState& state, const ProblemInstance& instance) {
    refresh_posterior(state, instance);
    state.pending_query = -1;
    std::vector<int> asked;
    for (const auto& a : state.history) asked.push_back(a.query);
    try {
        const NextStep step = next_query(instance, state.remaining, asked, state.config);
        if (step.done) {
            state.status = SessionState::Status::identified;
            state.identified = step.identified;
        } else {
            state.status = SessionState::Status::awaiting_answer;
            state.pending_query = step.query;
        }
    } catch (const InconsistentAnswers&) {
        state.status = SessionState::Status::failed;
        state.failure = "inconsistent answers";
    } catch (const NotIdentifiable&) {
        state.status = SessionState::Status::failed;
        state.failure = "remaining objects cannot be told apart";
    }
}

void apply_answer(SessionState& state, const ProblemInstance& instance, int bit) {
    const int query = state.pending_query;
    state.history.push_back({query, bit});
    std::erase_if(state.remaining, [&](int i) { return static_cast<int>(instance.response(i, query)) != bit; });
    advance(state, instance);
}

SessionState initial_state(const ProblemInstance& instance, const BuilderConfig& config) {
    SessionState state;
    state.config = config;
    state.remaining = instance.all_objects();
    advance(state, instance);
    return state;
}

}  // namespace

SessionState replay_session(const ProblemInstance& instance, const BuilderConfig& config,
                            const std::vector<Answer>& answers) {
    SessionState state = initial_state(instance, config);
    for (const auto& a : answers) {
        if (state.status != SessionState::Status::awaiting_answer || a.query != state.pending_query)
            throw std::invalid_argument("recorded answers do not follow the session's query sequence");
        apply_answer(state, instance, a.bit);
    }
    return state;
}

SessionStore::SessionStore(std::optional<std::filesystem::path> data_dir, std::chrono::seconds idle_timeout)
    : data_dir_(std::move(data_dir)), idle_timeout_(idle_timeout) {
    if (data_dir_) {
        std::filesystem::create_directories(*data_dir_);
        load_persisted();
    }
}

void SessionStore::load_persisted() {
    for (const auto& file : std::filesystem::directory_iterator(*data_dir_)) {
        if (file.path().extension() != ".json") continue;
        const json doc = json::parse(read_file(file.path().string()));
        RegisteredInstance reg;
        reg.id = doc.at("id").get<std::string>();
        reg.name = doc.value("name", std::string());
        reg.instance = std::make_shared<const ProblemInstance>(instance_from_json(doc.at("instance")));
        if (reg.id.rfind("inst-", 0) == 0) {
            const auto n = std::strtoull(reg.id.c_str() + 5, nullptr, 10);
            next_instance_ = std::max(next_instance_, static_cast<std::uint64_t>(n) + 1);
        }
        instances_.emplace(reg.id, std::move(reg));
    }
}

std::string SessionStore::register_instance(ProblemInstance instance, std::string name) {
    const auto violations = validate_instance(instance);
    if (!violations.empty()) throw ServiceError(400, "invalid instance: " + violations.front());

    std::unique_lock lock(instances_mutex_);
    RegisteredInstance reg;
    reg.id = "inst-" + std::to_string(next_instance_++);
    reg.name = std::move(name);
    reg.instance = std::make_shared<const ProblemInstance>(std::move(instance));
    if (data_dir_) {
        json doc{{"id", reg.id}, {"name", reg.name}, {"instance", instance_to_json(*reg.instance)}};
        write_file((*data_dir_ / (reg.id + ".json")).string(), doc.dump(2) + "\n");
    }
    const std::string id = reg.id;
    instances_.emplace(id, std::move(reg));
    return id;
}

std::vector<RegisteredInstance> SessionStore::list_instances() const {
    std::shared_lock lock(instances_mutex_);
    std::vector<RegisteredInstance> out;
    for (const auto& [id, reg] : instances_) out.push_back(reg);
    return out;
}

RegisteredInstance SessionStore::get_instance(const std::string& id) const {
    std::shared_lock lock(instances_mutex_);
    auto it = instances_.find(id);
    if (it == instances_.end()) throw ServiceError(404, "unknown instance " + id);
    return it->second;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find_session(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "unknown session " + id);
    return it->second;
}

SessionState SessionStore::create_session(const std::string& instance_id, const BuilderConfig& config) {
    evict_idle();
    const RegisteredInstance reg = get_instance(instance_id);
    if (auto witness = check_identifiability(*reg.instance, config.mode)) {
        throw ServiceError(400, "instance is not identifiable in " + std::string(to_string(config.mode)) +
                                    " mode: objects " + std::to_string(witness->first) + " and " +
                                    std::to_string(witness->second) + " answer every query alike");
    }
    auto entry = std::make_shared<Entry>();
    entry->instance = reg.instance;
    entry->state = initial_state(*reg.instance, config);
    entry->state.instance_id = instance_id;
    entry->last_access = Clock::now();

    std::unique_lock lock(sessions_mutex_);
    entry->state.id = "sess-" + std::to_string(next_session_++);
    sessions_.emplace(entry->state.id, entry);
    return entry->state;
}

SessionState SessionStore::submit_answer(const std::string& session_id, int bit,
                                         std::optional<int> expected_query) {
    if (bit != 0 && bit != 1) throw ServiceError(400, "bit must be 0 or 1");
    auto entry = find_session(session_id);
    std::lock_guard lock(entry->mutex);
    entry->last_access = Clock::now();
    SessionState& state = entry->state;
    if (state.status != SessionState::Status::awaiting_answer)
        throw ServiceError(409, std::string("session is ") + to_string(state.status) + ", not awaiting an answer");
    if (expected_query && *expected_query != state.pending_query)
        throw ServiceError(409, "answer is for query " + std::to_string(*expected_query) +
                                    " but the pending query is " + std::to_string(state.pending_query));
    apply_answer(state, *entry->instance, bit);
    return state;
}

SessionState SessionStore::get_session(const std::string& session_id) {
    auto entry = find_session(session_id);
    std::lock_guard lock(entry->mutex);
    entry->last_access = Clock::now();
    return entry->state;
}

void SessionStore::delete_session(const std::string& session_id) {
    std::unique_lock lock(sessions_mutex_);
    if (sessions_.erase(session_id) == 0) throw ServiceError(404, "unknown session " + session_id);
}

std::size_t SessionStore::evict_idle(Clock::time_point now) {
    std::unique_lock lock(sessions_mutex_);
    return std::erase_if(sessions_, [&](const auto& item) {
        std::lock_guard entry_lock(item.second->mutex);
        return now - item.second->last_access > idle_timeout_;
    });
}

std::size_t SessionStore::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

json session_to_json(const SessionState& state, const ProblemInstance& instance) {
    json doc;
    doc["id"] = state.id;
    doc["instance_id"] = state.instance_id;
    doc["config"] = config_to_json(state.config);
    doc["status"] = to_string(state.status);
    doc["pending_query"] = nullptr;
    doc["identified"] = nullptr;
    doc["failure"] = nullptr;
    if (state.status == SessionState::Status::awaiting_answer)
        doc["pending_query"] = json{{"index", state.pending_query}, {"name", instance.query_name(state.pending_query)}};
    if (state.status == SessionState::Status::identified) {
        const bool object = state.config.mode == Mode::object || !instance.has_labels();
        doc["identified"] = json{{"kind", object ? "object" : "group"},
                                 {"index", state.identified},
                                 {"name", object ? instance.object_name(state.identified)
                                                 : instance.group_name(state.identified)}};
    }
    if (state.status == SessionState::Status::failed) doc["failure"] = state.failure;
    json history = json::array();
    for (const auto& a : state.history)
        history.push_back(json{{"query", a.query}, {"name", instance.query_name(a.query)}, {"bit", a.bit}});
    doc["history"] = std::move(history);
    doc["questions"] = state.history.size();
    doc["remaining"] = state.remaining;
    json posterior = json::array();
    for (std::size_t k = 0; k < state.remaining.size(); ++k) {
        const int i = state.remaining[k];
        json item{{"object", i}, {"name", instance.object_name(i)}, {"mass", state.posterior[k]}};
        if (instance.has_labels()) item["group"] = instance.group_name(instance.labels[i] - 1);
        posterior.push_back(std::move(item));
    }
    doc["posterior"] = std::move(posterior);
    return doc;
}

}  // namespace qtree
