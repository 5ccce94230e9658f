#include "storm_audit/http_transport.hpp"

#include <httplib.h>

namespace storm_audit::catalog {

std::optional<UrlParts> split_url(std::string_view url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) return std::nullopt;
    auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") return std::nullopt;
    auto host_start = scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == host_start) return std::nullopt;
    UrlParts parts;
    parts.scheme_host_port = std::string(url.substr(0, path_start));
    parts.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
    if (parts.scheme_host_port.size() <= host_start) return std::nullopt;
    return parts;
}

TransferStatus HttpTransport::get(const std::string& url, const Sink& sink) {
    auto parts = split_url(url);
    if (!parts) return TransferStatus{false, 0, "unsupported URL: " + url};

    httplib::Client client(parts->scheme_host_port);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);

    int status = 0;
    auto result = client.Get(
        parts->path,
        [&status](const httplib::Response& response) {
            status = response.status;
            return response.status >= 200 && response.status < 300;
        },
        [&sink](const char* data, std::size_t length) { return sink(std::string_view(data, length)); });

    if (!result) {
        if (status != 0) return TransferStatus{false, status, "HTTP " + std::to_string(status)};
        return TransferStatus{false, 0, httplib::to_string(result.error())};
    }
    return TransferStatus{true, result->status, {}};
}

} // namespace storm_audit::catalog
