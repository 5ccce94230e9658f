#pragma once

#include "storm_audit/catalog.hpp"

namespace storm_audit::catalog {

/// Transport over plain HTTP/HTTPS, one attempt per call, redirects followed.
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(int timeout_seconds = 60) : timeout_seconds_(timeout_seconds) {}

    TransferStatus get(const std::string& url, const Sink& sink) override;

private:
    int timeout_seconds_;
};

struct UrlParts {
    std::string scheme_host_port; // "https://host:port"
    std::string path;             // "/a/b?c"
};

/// Splits an absolute http(s) URL; nullopt for anything else.
std::optional<UrlParts> split_url(std::string_view url);

} // namespace storm_audit::catalog
