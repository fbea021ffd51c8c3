#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "presage/error.hpp"
#include "presage/time.hpp"

namespace presage {

enum class UserRole : int { organizer = 0, required, optional };
enum class ResponseStatus : int {
    responded_yes = 0,
    responded_tentative,
    no_response,
    no_response_requested
};
enum class Interruptability : int { low = 0, medium, high };
enum class AnnotationSource : int { heuristic_draft = 0, manual };

inline const char* to_string(UserRole r) {
    static constexpr const char* names[] = {"organizer", "required", "optional"};
    return names[static_cast<int>(r)];
}
inline const char* to_string(ResponseStatus s) {
    static constexpr const char* names[] = {"responded_yes", "responded_tentative", "no_response",
                                            "no_response_requested"};
    return names[static_cast<int>(s)];
}
inline const char* to_string(Interruptability i) {
    static constexpr const char* names[] = {"low", "medium", "high"};
    return names[static_cast<int>(i)];
}
inline const char* to_string(AnnotationSource s) {
    return s == AnnotationSource::heuristic_draft ? "heuristic_draft" : "manual";
}

template <typename E>
E enum_from_string(const std::string&);

template <>
inline UserRole enum_from_string<UserRole>(const std::string& s) {
    if (s == "organizer") return UserRole::organizer;
    if (s == "required") return UserRole::required;
    if (s == "optional") return UserRole::optional;
    fail(Errc::parse_error, "unknown user role: " + s);
}
template <>
inline ResponseStatus enum_from_string<ResponseStatus>(const std::string& s) {
    if (s == "responded_yes") return ResponseStatus::responded_yes;
    if (s == "responded_tentative") return ResponseStatus::responded_tentative;
    if (s == "no_response") return ResponseStatus::no_response;
    if (s == "no_response_requested") return ResponseStatus::no_response_requested;
    fail(Errc::parse_error, "unknown response status: " + s);
}
template <>
inline Interruptability enum_from_string<Interruptability>(const std::string& s) {
    if (s == "low") return Interruptability::low;
    if (s == "medium") return Interruptability::medium;
    if (s == "high") return Interruptability::high;
    fail(Errc::parse_error, "unknown interruptability: " + s);
}
template <>
inline AnnotationSource enum_from_string<AnnotationSource>(const std::string& s) {
    if (s == "heuristic_draft") return AnnotationSource::heuristic_draft;
    if (s == "manual") return AnnotationSource::manual;
    fail(Errc::parse_error, "unknown annotation source: " + s);
}

// One calendar item as logged from a user's calendar.
struct AppointmentRecord {
    std::string id;
    Timestamp start;
    Timestamp end;
    std::string subject;
    std::string location_field;
    std::string organizer;
    std::vector<std::string> attendees;
    UserRole user_role = UserRole::required;
    ResponseStatus response_status = ResponseStatus::no_response;
    bool recurrent = false;
    bool busy_flag = true;  // busy vs free
    bool organized_by_alias = false;

    void validate() const {
        require(start < end, Errc::invalid_argument, "appointment must start before it ends");
        require(!organizer.empty(), Errc::invalid_argument, "appointment needs an organizer");
    }

    bool overlaps(Timestamp at) const { return start <= at && at < end; }
};

// Attendance / interruptability / location annotation for one appointment.
// Manual annotations override heuristic drafts for the same id.
struct AnnotationRecord {
    std::string appointment_id;
    std::optional<bool> attended;
    std::optional<Interruptability> interruptability;
    std::optional<std::string> location;
    AnnotationSource source = AnnotationSource::manual;

    bool has_content() const {
        return attended.has_value() || interruptability.has_value() || location.has_value();
    }
};

using AnnotationMap = std::map<std::string, AnnotationRecord>;

// Flat-file stand-in for a live organizational directory: manager edges plus
// the set of ids that denote mailing lists.
struct DirectoryStub {
    std::map<std::string, std::string> manager;  // person -> manager
    std::set<std::string> aliases;

    bool is_alias(const std::string& id) const { return aliases.count(id) > 0; }

    std::optional<std::string> manager_of(const std::string& person) const {
        auto it = manager.find(person);
        if (it == manager.end()) return std::nullopt;
        return it->second;
    }

    void validate() const {
        // Manager chains must terminate; walk each person with a cycle bound.
        for (const auto& [person, _] : manager) {
            std::string cur = person;
            std::size_t steps = 0;
            while (true) {
                auto it = manager.find(cur);
                if (it == manager.end()) break;
                cur = it->second;
                require(++steps <= manager.size(), Errc::invalid_config,
                        "directory manager graph has a cycle at " + person);
            }
        }
    }
};

}  // namespace presage
