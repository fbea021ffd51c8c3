#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "presage/forecast.hpp"
#include "presage/wire.hpp"

namespace presage {

// HTTP query service. Requests run against an immutable snapshot; /v1/reload
// rebuilds a fresh snapshot from the data directory and swaps it in atomically
// with respect to in-flight requests. Nothing here ever writes to the store.
class Service {
  public:
    Service(std::filesystem::path data_dir, EngineConfig cfg)
        : data_dir_(std::move(data_dir)), cfg_(std::move(cfg)) {
        reload();
        install_routes();
    }

    ~Service() { stop(); }

    // Binds to `port` (0 picks a free port) and serves on a background
    // thread. Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        if (port == 0) {
            port_ = server_.bind_to_any_port(host.c_str());
            require(port_ > 0, Errc::io_error, "cannot bind service port");
        } else {
            require(server_.bind_to_port(host.c_str(), port), Errc::io_error,
                    "cannot bind service port");
            port_ = port;
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }

    std::shared_ptr<const Snapshot> snapshot() const {
        std::lock_guard<std::mutex> lock(snap_mutex_);
        return snap_;
    }

    void reload() {
        auto fresh = std::make_shared<const Snapshot>(Snapshot::load(data_dir_, cfg_));
        std::lock_guard<std::mutex> lock(snap_mutex_);
        snap_ = std::move(fresh);
    }

  private:
    static int status_for(Errc code) {
        switch (code) {
            case Errc::not_found: return 404;
            case Errc::invalid_argument:
            case Errc::invalid_config:
            case Errc::parse_error:
            case Errc::unsorted_input:
            case Errc::out_of_order_append: return 400;
            case Errc::io_error: return 500;
            default: return 422;  // domain errors: NoData, InsufficientHistory, ...
        }
    }

    template <typename Fn>
    void handle(const httplib::Request& req, httplib::Response& res, Fn&& fn) {
        try {
            json body = req.body.empty() ? json::object() : json::parse(req.body);
            json out = fn(body);
            res.status = 200;
            res.set_content(out.dump(), "application/json");
        } catch (const Error& e) {
            res.status = status_for(e.code());
            res.set_content(error_json(e).dump(), "application/json");
        } catch (const json::exception& e) {
            Error err(Errc::parse_error, e.what());
            res.status = 400;
            res.set_content(error_json(err).dump(), "application/json");
        }
    }

    const AppointmentRecord& find_appointment(const Snapshot& snap, const std::string& user,
                                              const std::string& id) const {
        for (const auto& a : snap.user_data(user).calendar)
            if (a.id == id) return a;
        fail(Errc::not_found, "unknown appointment: " + id);
    }

    void install_routes() {
        server_.Post("/v1/forecast", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const json& body) {
                auto snap = snapshot();
                WireQuery q = parse_wire_query(body);
                double thr = q.confidence_threshold.value_or(snap->cfg.confidence_threshold);
                auto result = forecast(*snap, q.spec, q.confidence_threshold);
                return wire_result_json(result, q.spec.kind, thr);
            });
        });

        server_.Post("/v1/attendance", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const json& body) {
                auto snap = snapshot();
                std::string user = body.at("user").get<std::string>();
                std::string id = body.at("appointment_id").get<std::string>();
                const auto& appt = find_appointment(*snap, user, id);
                const ModelSet* models = snap->model_set(user);
                require(models && models->attendance, Errc::model_degenerate,
                        "no attendance model for " + user);
                double p = predict_attendance(*models->attendance, appt, snap->directory, user,
                                              snap->cfg);
                return json{{"appointment_id", id}, {"p_attend", p}};
            });
        });

        server_.Post("/v1/interruptability",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         handle(req, res, [this](const json& body) {
                             auto snap = snapshot();
                             std::string user = body.at("user").get<std::string>();
                             std::string id = body.at("appointment_id").get<std::string>();
                             const auto& appt = find_appointment(*snap, user, id);
                             const ModelSet* models = snap->model_set(user);
                             require(models && models->interruptability, Errc::model_degenerate,
                                     "no interruptability model for " + user);
                             auto p = predict_interruptability(*models->interruptability, appt,
                                                               snap->directory, user, snap->cfg);
                             return json{{"appointment_id", id},
                                         {"p_low", p[0]},
                                         {"p_med", p[1]},
                                         {"p_high", p[2]}};
                         });
                     });

        server_.Post("/v1/eci", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const json& body) {
                auto snap = snapshot();
                std::string user = body.at("user").get<std::string>();
                Timestamp at = parse_rfc3339(body.at("at").get<std::string>());
                return eci_json(eci_at(*snap, user, at));
            });
        });

        server_.Post("/v1/reload", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const json&) {
                reload();
                auto snap = snapshot();
                return json{{"reloaded", true}, {"users", snap->users.size()}};
            });
        });
    }

    std::filesystem::path data_dir_;
    EngineConfig cfg_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex snap_mutex_;
    std::shared_ptr<const Snapshot> snap_;
};

}  // namespace presage
