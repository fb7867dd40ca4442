#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <type_traits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "consilium/error.hpp"
#include "consilium/json_util.hpp"
#include "consilium/session.hpp"

namespace consilium {

inline std::string utc_now() {
  using namespace std::chrono;
  auto now = system_clock::now();
  auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

// Thread-safe random hex tokens.
class TokenSource {
 public:
  TokenSource() : rng_(std::random_device{}()) {}
  explicit TokenSource(std::uint64_t seed) : rng_(seed) {}

  std::string operator()(std::size_t hex_digits = 32) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::lock_guard lock(mu_);
    std::string out;
    out.reserve(hex_digits);
    while (out.size() < hex_digits) {
      auto word = rng_();
      for (int i = 0; i < 16 && out.size() < hex_digits; ++i, word >>= 4) out.push_back(kHex[word & 0xf]);
    }
    return out;
  }

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
};

/// One JSON document per session under `<dir>/sessions/<id>.json`, replaced
/// atomically by writing a temporary file and renaming it over the target.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir) : dir_(std::move(data_dir) / "sessions") {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& directory() const noexcept { return dir_; }

  std::filesystem::path path_for(const std::string& id) const { return dir_ / (id + ".json"); }

  void save(const Session& s) const {
    auto target = path_for(s.id);
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) fail(ErrorCode::conflict, "cannot write " + tmp.string());
      out << session_to_storage_json(s).dump(2) << '\n';
      out.flush();
      if (!out) fail(ErrorCode::conflict, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  }

  std::optional<Session> load(const std::string& id) const {
    auto path = path_for(id);
    if (!std::filesystem::exists(path)) return std::nullopt;
    return read(path);
  }

  /// Every readable session; unreadable files are reported and skipped.
  std::vector<Session> load_all(std::ostream& log = std::cerr) const {
    std::vector<Session> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (entry.path().extension() != ".json") continue;
      try {
        out.push_back(read(entry.path()));
      } catch (const std::exception& e) {
        log << "skipping " << entry.path().string() << ": " << e.what() << '\n';
      }
    }
    return out;
  }

  static Session read(const std::filesystem::path& path) {
    Json doc = Json::parse(detail::read_file(path.string()), nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::parse_error, "malformed JSON in " + path.string());
    return session_from_storage_json(doc);
  }

 private:
  std::filesystem::path dir_;
};

// Commands on one session are linearized by that session's lock; distinct
// sessions never contend beyond the brief registry lookup. A mutation runs on
// a copy that only replaces the live session once persisted.
class SessionService {
 public:
  struct Options {
    std::optional<std::filesystem::path> data_dir;  // in-memory when empty
    std::function<std::string()> clock = utc_now;
    std::function<std::string(std::size_t)> tokens;
  };

  struct Issued {
    Session session;
    std::string token;
  };

  SessionService() : SessionService(Options{}) {}

  explicit SessionService(Options options) : clock_(std::move(options.clock)), tokens_(std::move(options.tokens)) {
    if (!tokens_) {
      tokens_ = [src = std::make_shared<TokenSource>()](std::size_t n) { return (*src)(n); };
    }
    if (options.data_dir) {
      store_.emplace(*options.data_dir);
      for (auto& s : store_->load_all()) {
        auto id = s.id;
        slots_.emplace(std::move(id), std::make_shared<Slot>(std::move(s)));
      }
    }
  }

  const SessionStore* store() const { return store_ ? &*store_ : nullptr; }

  Issued create(SessionSpec spec, std::string facilitator_id, std::string display_name) {
    auto token = tokens_(32);
    Participant facilitator{std::move(facilitator_id), std::move(display_name), Role::facilitator, token};
    auto session = create_session(std::move(spec), std::move(facilitator), fresh_id(), clock_());
    persist(session);
    std::unique_lock lock(registry_mu_);
    slots_.emplace(session.id, std::make_shared<Slot>(session));
    return {std::move(session), std::move(token)};
  }

  Issued enroll(const std::string& id, const std::string& caller_token, Participant p) {
    p.token = tokens_(32);
    auto token = p.token;
    auto s = mutate(id, [&](Session& s) {
      require_facilitator(s, caller_token);
      add_participant(s, std::move(p), clock_());
    });
    return {std::move(s), std::move(token)};
  }

  Session advance(const std::string& id, const std::string& caller_token, Phase target) {
    return mutate(id, [&](Session& s) {
      require_facilitator(s, caller_token);
      advance_phase(s, target, clock_());
    });
  }

  Session submit(const std::string& id, const std::string& caller_token, const std::string& participant,
                 Ranking ranking) {
    return mutate(id, [&](Session& s) {
      const auto* caller = s.find_by_token(caller_token);
      if (!caller || caller->id != participant) {
        fail(ErrorCode::forbidden, "token does not belong to participant " + participant);
      }
      submit_ballot(s, participant, std::move(ranking), clock_());
    });
  }

  Issued clone(const std::string& id, const std::string& caller_token) {
    auto source = get(id);
    require_facilitator(source, caller_token);
    auto session = clone_session(source, fresh_id(), clock_());
    persist(session);
    std::unique_lock lock(registry_mu_);
    slots_.emplace(session.id, std::make_shared<Slot>(session));
    return {std::move(session), caller_token};
  }

  Suggestion suggest(const std::string& id, const std::map<std::string, double>& weights) const {
    return read(id, [&](const Session& s) { return suggest_ballot(s, weights); });
  }

  VoteResult results(const std::string& id, Method method) const {
    return read(id, [&](const Session& s) { return get_results(s, method); });
  }

  Session get(const std::string& id) const {
    return read(id, [](const Session& s) { return s; });
  }

  std::vector<std::string> ids() const {
    std::shared_lock lock(registry_mu_);
    std::vector<std::string> out;
    for (const auto& [id, slot] : slots_) out.push_back(id);
    return out;
  }

 private:
  struct Slot {
    explicit Slot(Session s) : session(std::move(s)) {}
    mutable std::shared_mutex mu;
    Session session;
  };

  static void require_facilitator(const Session& s, const std::string& token) {
    const auto* caller = s.find_by_token(token);
    if (!caller || caller->role != Role::facilitator) fail(ErrorCode::forbidden, "facilitator token required");
  }

  std::shared_ptr<Slot> slot(const std::string& id) const {
    std::shared_lock lock(registry_mu_);
    auto it = slots_.find(id);
    if (it == slots_.end()) fail(ErrorCode::not_found, "no session " + id);
    return it->second;
  }

  template <typename Fn>
  std::invoke_result_t<Fn, const Session&> read(const std::string& id, Fn&& fn) const {
    auto s = slot(id);
    std::shared_lock lock(s->mu);
    return fn(s->session);
  }

  template <typename Fn>
  Session mutate(const std::string& id, Fn&& fn) {
    auto s = slot(id);
    std::unique_lock lock(s->mu);
    Session next = s->session;
    fn(next);
    persist(next);
    s->session = next;
    return next;
  }

  void persist(const Session& s) const {
    if (store_) store_->save(s);
  }

  std::string fresh_id() {
    for (;;) {
      auto id = tokens_(12);
      std::shared_lock lock(registry_mu_);
      if (!slots_.count(id)) return id;
    }
  }

  std::function<std::string()> clock_;
  std::function<std::string(std::size_t)> tokens_;
  std::optional<SessionStore> store_;
  mutable std::shared_mutex registry_mu_;
  std::unordered_map<std::string, std::shared_ptr<Slot>> slots_;
};

}  // namespace consilium
