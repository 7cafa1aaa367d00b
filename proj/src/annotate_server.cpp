#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "qintent/annotate.hpp"
#include "qintent/error.hpp"

namespace qintent {

using nlohmann::json;

struct AnnotationServer::Impl {
  AnnotationStore& store;
  httplib::Server server;
  std::thread thread;

  explicit Impl(AnnotationStore& s) : store(s) {}
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, json{{"error", message}});
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, std::string static_dir)
    : impl_(std::make_unique<Impl>(store)) {
  auto& svr = impl_->server;
  auto& st = impl_->store;

  svr.Get("/api/task", [&st](const httplib::Request& req, httplib::Response& res) {
    const std::string annotator = req.get_param_value("annotator");
    if (!st.has_annotator(annotator)) return error(res, 404, "unknown annotator '" + annotator + "'");
    const auto task = st.next_task(annotator);
    if (!task) return reply(res, 200, json{{"done", true}});
    reply(res, 200,
          json{{"query_id", task->query_id}, {"tokens", task->tokens}, {"mode", mode_name(task->mode)}});
  });

  svr.Post("/api/label", [&st](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) return error(res, 400, "body is not a JSON object");
    if (!body.contains("annotator") || !body["annotator"].is_string() || !body.contains("query_id") ||
        !body["query_id"].is_number_integer() || !body.contains("bits") || !body["bits"].is_array())
      return error(res, 422, "expected {annotator, query_id, bits}");
    const auto& raw = body["bits"];
    if (raw.size() != kNumIntents) return error(res, 422, "bits must have three entries");
    std::array<bool, kNumIntents> bits{};
    for (std::size_t c = 0; c < kNumIntents; ++c) {
      if (!raw[c].is_number_integer() || (raw[c] != 0 && raw[c] != 1))
        return error(res, 422, "bits must be 0 or 1");
      bits[c] = raw[c] == 1;
    }
    const auto r = st.submit(body["annotator"].get<std::string>(), body["query_id"].get<std::int64_t>(), bits);
    switch (r.status) {
      case SubmitStatus::Accepted: return reply(res, 200, json{{"status", "ok"}});
      case SubmitStatus::UnknownAnnotator:
      case SubmitStatus::UnknownQuery: return error(res, 404, r.message);
      case SubmitStatus::Duplicate: return error(res, 409, r.message);
      case SubmitStatus::InvalidLabel: return error(res, 422, r.message);
    }
  });

  svr.Get("/api/export", [&st](const httplib::Request&, httplib::Response& res) {
    res.set_content(st.export_annotations(), "text/tab-separated-values");
  });

  svr.Get("/api/progress", [&st](const httplib::Request&, httplib::Response& res) {
    const auto p = st.progress();
    reply(res, 200,
          json{{"labeled", p.labeled}, {"total", p.total}, {"gt2_count", p.gt2_count}, {"gt3_count", p.gt3_count}});
  });

  if (!static_dir.empty() && !svr.set_mount_point("/", static_dir))
    throw IoError("static directory '" + static_dir + "' does not exist");
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start(const std::string& host, int port) {
  auto& svr = impl_->server;
  const int bound = port == 0 ? svr.bind_to_any_port(host) : (svr.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  return bound;
}

bool AnnotationServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace qintent
