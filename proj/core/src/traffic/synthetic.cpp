#include "fpe/traffic/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fpe/error.hpp"

namespace fpe::traffic {

namespace {

template <typename T, std::size_t N>
const T& pick(const std::array<T, N>& items, RandomSource& rng) {
  return items[rng.uniform_below(N)];
}

std::size_t uniform_between(RandomSource& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.uniform_below(hi - lo + 1);
}

void append(Bytes& out, std::string_view text) { out.insert(out.end(), text.begin(), text.end()); }

void put_be16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_be32(Bytes& out, std::uint32_t v) {
  put_be16(out, static_cast<std::uint16_t>(v >> 16));
  put_be16(out, static_cast<std::uint16_t>(v));
}

void append_random(Bytes& out, std::size_t n, RandomSource& rng) {
  const std::size_t start = out.size();
  out.resize(start + n);
  rng.fill(std::span<std::uint8_t>(out).subspan(start));
}

std::string hex_string(std::size_t n, RandomSource& rng) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(n, '0');
  for (auto& c : s) c = kDigits[rng.uniform_below(16)];
  return s;
}

// ---------------------------------------------------------------- HTTP ----

constexpr std::array<std::string_view, 6> kHosts = {
    "blog.example.org", "www.example.org", "example.org",
    "cdn.example.org",  "10.20.0.15",      "wp.internal.example.org"};

constexpr std::array<std::string_view, 14> kPaths = {
    "/",
    "/index.php",
    "/wp-login.php",
    "/wp-admin/admin-ajax.php",
    "/wp-json/wp/v2/posts?per_page=10",
    "/wp-content/themes/twentytwentyfour/style.css?ver=6.4.2",
    "/wp-includes/js/jquery/jquery.min.js?ver=3.7.1",
    "/wp-content/uploads/2023/11/header-1024x576.jpg",
    "/2023/12/04/hello-world/",
    "/category/news/page/2/",
    "/feed/",
    "/xmlrpc.php",
    "/wp-cron.php?doing_wp_cron=1701685293.4519460201263427734375",
    "/robots.txt"};

constexpr std::array<std::string_view, 5> kUserAgents = {
    "Mozilla/5.0 (X11; Linux x86_64; rv:121.0) Gecko/20100101 Firefox/121.0",
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) "
    "Chrome/120.0.0.0 Safari/537.36",
    "Mozilla/5.0 (iPhone; CPU iPhone OS 17_1 like Mac OS X) AppleWebKit/605.1.15 (KHTML, "
    "like Gecko) Version/17.1 Mobile/15E148 Safari/604.1",
    "WordPress/6.4.2; https://blog.example.org",
    "curl/7.88.1"};

constexpr std::array<std::string_view, 4> kAccept = {
    "text/html,application/xhtml+xml,application/xml;q=0.9,image/avif,image/webp,*/*;q=0.8",
    "text/css,*/*;q=0.1", "application/json, text/plain, */*", "*/*"};

constexpr std::array<std::string_view, 7> kStatus = {
    "200 OK", "200 OK", "200 OK", "304 Not Modified", "301 Moved Permanently", "404 Not Found",
    "302 Found"};

constexpr std::array<std::string_view, 4> kContentTypes = {
    "text/html; charset=UTF-8", "application/json; charset=UTF-8", "text/css",
    "application/javascript"};

constexpr std::array<std::string_view, 7> kDays = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
constexpr std::array<std::string_view, 12> kMonths = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

constexpr std::string_view kHtmlBody =
    "<!DOCTYPE html>\n<html lang=\"en-US\">\n<head>\n\t<meta charset=\"UTF-8\" />\n"
    "\t<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\" />\n"
    "<meta name='robots' content='max-image-preview:large' />\n"
    "\t<title>Hello world! &#8211; Example Blog</title>\n"
    "<link rel=\"alternate\" type=\"application/rss+xml\" title=\"Example Blog &raquo; Feed\" "
    "href=\"https://blog.example.org/feed/\" />\n"
    "<link rel='stylesheet' id='wp-block-library-css' "
    "href='https://blog.example.org/wp-includes/css/dist/block-library/style.min.css?ver=6.4.2' "
    "media='all' />\n</head>\n\n<body class=\"home blog wp-embed-responsive\">\n\n"
    "<div class=\"wp-site-blocks\">\n\t<header class=\"wp-block-template-part\">\n"
    "\t\t<div class=\"wp-block-group alignwide\">\n"
    "\t\t\t<p class=\"wp-block-site-title\"><a href=\"https://blog.example.org\" "
    "target=\"_self\" rel=\"home\">Example Blog</a></p>\n\t\t</div>\n\t</header>\n"
    "\t<main class=\"wp-block-group\">\n\t\t<h2 class=\"wp-block-post-title\">Hello world!</h2>\n"
    "\t\t<p>Welcome to WordPress. This is your first post. Edit or delete it, then start "
    "writing!</p>\n\t\t<div class=\"wp-block-post-date\"><time datetime=\"2023-12-04T10:21:33+00:00\">"
    "December 4, 2023</time></div>\n\t</main>\n</div>\n</body>\n</html>\n";

constexpr std::string_view kJsonBody =
    "[{\"id\":1,\"date\":\"2023-12-04T10:21:33\",\"slug\":\"hello-world\",\"status\":\"publish\","
    "\"type\":\"post\",\"link\":\"https:\\/\\/blog.example.org\\/2023\\/12\\/04\\/hello-world\\/\","
    "\"title\":{\"rendered\":\"Hello world!\"},\"content\":{\"rendered\":\"\\n<p>Welcome to "
    "WordPress. This is your first post. Edit or delete it, then start writing!<\\/p>\\n\","
    "\"protected\":false},\"author\":1,\"featured_media\":0,\"comment_status\":\"open\","
    "\"ping_status\":\"open\",\"sticky\":false,\"template\":\"\",\"format\":\"standard\","
    "\"categories\":[1],\"tags\":[]}]";

constexpr std::string_view kCssBody =
    "body {\n\tmargin: 0;\n\tfont-family: -apple-system, BlinkMacSystemFont, \"Segoe UI\", Roboto, "
    "sans-serif;\n\tline-height: 1.6;\n\tcolor: #1e1e1e;\n}\n\n.wp-site-blocks {\n\tpadding-top: "
    "var(--wp--style--root--padding-top);\n\tpadding-bottom: "
    "var(--wp--style--root--padding-bottom);\n}\n\na:where(:not(.wp-element-button)) {\n\tcolor: "
    "var(--wp--preset--color--contrast);\n\ttext-decoration: underline;\n}\n";

std::string http_date(RandomSource& rng) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s, %02d %s 2023 %02d:%02d:%02d GMT",
                std::string(pick(kDays, rng)).c_str(), static_cast<int>(uniform_between(rng, 1, 28)),
                std::string(pick(kMonths, rng)).c_str(), static_cast<int>(rng.uniform_below(24)),
                static_cast<int>(rng.uniform_below(60)), static_cast<int>(rng.uniform_below(60)));
  return buf;
}

Bytes http_request(std::size_t max_payload, RandomSource& rng) {
  const double roll = rng.uniform01();
  const std::string_view method = roll < 0.75 ? "GET" : roll < 0.9 ? "POST" : roll < 0.96 ? "HEAD" : "OPTIONS";
  const std::string host(pick(kHosts, rng));
  std::ostringstream h;
  h << method << ' ' << pick(kPaths, rng) << " HTTP/1.1\r\n";
  h << "Host: " << host << "\r\n";
  h << "User-Agent: " << pick(kUserAgents, rng) << "\r\n";
  h << "Accept: " << pick(kAccept, rng) << "\r\n";
  if (rng.bernoulli(0.7)) h << "Accept-Language: en-US,en;q=0.5\r\n";
  h << "Accept-Encoding: gzip, deflate, br\r\n";
  if (rng.bernoulli(0.5)) h << "Referer: https://" << host << pick(kPaths, rng) << "\r\n";
  if (rng.bernoulli(0.3)) {
    h << "Cookie: wordpress_test_cookie=WP%20Cookie%20check; wordpress_logged_in_"
      << hex_string(32, rng) << "=admin%7C1702290093%7C" << hex_string(43, rng) << "\r\n";
  }
  if (rng.bernoulli(0.2)) h << "If-None-Match: \"" << hex_string(8, rng) << '-' << hex_string(4, rng) << "\"\r\n";
  h << "Connection: keep-alive\r\n";
  std::string body;
  if (method == "POST") {
    body = "action=heartbeat&_nonce=" + hex_string(10, rng) +
           "&data%5Bwp-refresh-post-lock%5D%5Bpost_id%5D=" + std::to_string(rng.uniform_below(900) + 1) +
           "&interval=60&screen_id=post&has_focus=false";
    h << "Content-Type: application/x-www-form-urlencoded; charset=UTF-8\r\n";
    h << "Content-Length: " << body.size() << "\r\n";
  }
  h << "\r\n" << body;
  std::string text = h.str();
  if (text.size() > max_payload) text.resize(max_payload);
  return Bytes(text.begin(), text.end());
}

Bytes http_response(std::size_t max_payload, RandomSource& rng) {
  const std::string_view status = pick(kStatus, rng);
  const bool has_body = status.starts_with("200") || status.starts_with("404");
  const std::size_t type_index = rng.uniform_below(kContentTypes.size());
  const std::string_view body_src = type_index == 0   ? kHtmlBody
                                    : type_index == 1 ? kJsonBody
                                                      : kCssBody;
  std::ostringstream h;
  h << "HTTP/1.1 " << status << "\r\n";
  h << "Server: nginx/1.22.1\r\n";
  h << "Date: " << http_date(rng) << "\r\n";
  if (has_body) {
    h << "Content-Type: " << kContentTypes[type_index] << "\r\n";
    h << "Content-Length: " << (body_src.size() + rng.uniform_below(40000)) << "\r\n";
  }
  h << "Connection: keep-alive\r\n";
  if (rng.bernoulli(0.6)) h << "X-Powered-By: PHP/8.2.7\r\n";
  if (rng.bernoulli(0.5)) h << "Cache-Control: max-age=3600, public\r\n";
  if (rng.bernoulli(0.5)) h << "ETag: \"" << hex_string(8, rng) << '-' << hex_string(5, rng) << "\"\r\n";
  if (status.starts_with("30")) h << "Location: https://" << pick(kHosts, rng) << pick(kPaths, rng) << "\r\n";
  if (rng.bernoulli(0.4)) {
    h << "Link: <https://blog.example.org/wp-json/>; rel=\"https://api.w.org/\"\r\n";
  }
  h << "Vary: Accept-Encoding\r\n\r\n";
  std::string text = h.str();
  if (has_body && text.size() < max_payload) {
    // Body fragments start at a random offset to vary the content per packet.
    const std::size_t start = rng.uniform_below(body_src.size() / 2);
    const std::size_t room = max_payload - text.size();
    const std::size_t want = uniform_between(rng, 0, std::min(room, body_src.size() - start));
    text.append(body_src.substr(start, want));
  }
  if (text.size() > max_payload) text.resize(max_payload);
  return Bytes(text.begin(), text.end());
}

// ----------------------------------------------------------------- TLS ----

constexpr std::array<std::string_view, 5> kSniHosts = {
    "blog.example.org", "www.example.org", "fonts.googleapis.com", "s.w.org",
    "api.wordpress.org"};

void tls_record(Bytes& out, std::uint8_t type, std::uint16_t version, ByteView body) {
  out.push_back(type);
  put_be16(out, version);
  put_be16(out, static_cast<std::uint16_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

Bytes client_hello(RandomSource& rng) {
  Bytes hs;
  hs.push_back(0x01);
  hs.insert(hs.end(), {0, 0, 0});  // length patched below
  put_be16(hs, 0x0303);
  append_random(hs, 32, rng);
  hs.push_back(32);
  append_random(hs, 32, rng);
  constexpr std::array<std::uint16_t, 17> kSuites = {
      0x1301, 0x1303, 0x1302, 0xc02b, 0xc02f, 0xcca9, 0xcca8, 0xc02c, 0xc030,
      0xc00a, 0xc009, 0xc013, 0xc014, 0x009c, 0x009d, 0x002f, 0x0035};
  put_be16(hs, static_cast<std::uint16_t>(kSuites.size() * 2));
  for (auto s : kSuites) put_be16(hs, s);
  hs.insert(hs.end(), {0x01, 0x00});

  Bytes ext;
  const std::string_view sni = pick(kSniHosts, rng);
  put_be16(ext, 0x0000);
  put_be16(ext, static_cast<std::uint16_t>(sni.size() + 5));
  put_be16(ext, static_cast<std::uint16_t>(sni.size() + 3));
  ext.push_back(0);
  put_be16(ext, static_cast<std::uint16_t>(sni.size()));
  append(ext, sni);
  ext.insert(ext.end(), {0x00, 0x17, 0x00, 0x00, 0xff, 0x01, 0x00, 0x01, 0x00});
  ext.insert(ext.end(), {0x00, 0x0a, 0x00, 0x0e, 0x00, 0x0c, 0x00, 0x1d, 0x00, 0x17, 0x00, 0x18,
                         0x00, 0x19, 0x01, 0x00, 0x01, 0x01});
  ext.insert(ext.end(), {0x00, 0x0b, 0x00, 0x02, 0x01, 0x00, 0x00, 0x23, 0x00, 0x00});
  ext.insert(ext.end(), {0x00, 0x10, 0x00, 0x0e, 0x00, 0x0c, 0x02, 'h', '2', 0x08, 'h', 't', 't',
                         'p', '/', '1', '.', '1'});
  ext.insert(ext.end(), {0x00, 0x05, 0x00, 0x05, 0x01, 0x00, 0x00, 0x00, 0x00});
  ext.insert(ext.end(), {0x00, 0x33, 0x00, 0x26, 0x00, 0x24, 0x00, 0x1d, 0x00, 0x20});
  append_random(ext, 32, rng);
  ext.insert(ext.end(), {0x00, 0x2b, 0x00, 0x05, 0x04, 0x03, 0x04, 0x03, 0x03});
  ext.insert(ext.end(), {0x00, 0x0d, 0x00, 0x18, 0x00, 0x16, 0x04, 0x03, 0x05, 0x03, 0x06, 0x03,
                         0x08, 0x04, 0x08, 0x05, 0x08, 0x06, 0x04, 0x01, 0x05, 0x01, 0x06, 0x01,
                         0x02, 0x03, 0x02, 0x01});
  ext.insert(ext.end(), {0x00, 0x2d, 0x00, 0x02, 0x01, 0x01});
  if (rng.bernoulli(0.5)) {
    // padding extension, all zero bytes
    const std::size_t pad = uniform_between(rng, 16, 200);
    put_be16(ext, 0x0015);
    put_be16(ext, static_cast<std::uint16_t>(pad));
    ext.insert(ext.end(), pad, 0x00);
  }
  put_be16(hs, static_cast<std::uint16_t>(ext.size()));
  hs.insert(hs.end(), ext.begin(), ext.end());
  const std::size_t body_len = hs.size() - 4;
  hs[1] = static_cast<std::uint8_t>(body_len >> 16);
  hs[2] = static_cast<std::uint8_t>(body_len >> 8);
  hs[3] = static_cast<std::uint8_t>(body_len);
  Bytes out;
  tls_record(out, 0x16, 0x0301, hs);
  return out;
}

Bytes server_hello_flight(std::size_t max_payload, RandomSource& rng) {
  Bytes hs;
  hs.insert(hs.end(), {0x02, 0x00, 0x00, 0x76});
  put_be16(hs, 0x0303);
  append_random(hs, 32, rng);
  hs.push_back(32);
  append_random(hs, 32, rng);
  hs.insert(hs.end(), {0x13, 0x01, 0x00, 0x00, 0x2e, 0x00, 0x2b, 0x00, 0x02, 0x03, 0x04, 0x00,
                       0x33, 0x00, 0x24, 0x00, 0x1d, 0x00, 0x20});
  append_random(hs, 32, rng);
  Bytes out;
  tls_record(out, 0x16, 0x0303, hs);
  const Bytes ccs = {0x01};
  tls_record(out, 0x14, 0x0303, ccs);
  if (out.size() + 5 + 32 < max_payload) {
    Bytes encrypted;
    append_random(encrypted, uniform_between(rng, 32, max_payload - out.size() - 5), rng);
    tls_record(out, 0x17, 0x0303, encrypted);
  }
  return out;
}

Bytes tls_payload(std::size_t max_payload, RandomSource& rng) {
  const double roll = rng.uniform01();
  Bytes out;
  if (roll < 0.10) {
    out = client_hello(rng);
  } else if (roll < 0.18) {
    out = server_hello_flight(max_payload, rng);
  } else if (roll < 0.25) {
    const Bytes alert = rng.bernoulli(0.5) ? Bytes{0x01, 0x00} : Bytes{};
    if (alert.empty()) {
      Bytes body;
      append_random(body, 19, rng);
      tls_record(out, 0x17, 0x0303, body);
    } else {
      tls_record(out, 0x15, 0x0303, alert);
    }
  } else {
    // Application data: one or more records of ciphertext.
    std::size_t room = max_payload;
    do {
      if (room < 5 + 17) break;
      const std::size_t len = uniform_between(rng, 17, std::min<std::size_t>(room - 5, 1200));
      Bytes body;
      append_random(body, len, rng);
      tls_record(out, 0x17, 0x0303, body);
      room = max_payload - out.size();
    } while (rng.bernoulli(0.15));
  }
  if (out.size() > max_payload) out.resize(max_payload);
  return out;
}

// ----------------------------------------------------------- DNS / TCP ----

constexpr std::array<std::string_view, 8> kDnsNames = {
    "blog.example.org", "www.example.org",     "api.wordpress.org", "downloads.wordpress.org",
    "s.w.org",          "fonts.googleapis.com", "secure.gravatar.com", "db1.internal.example.org"};

void put_name(Bytes& out, std::string_view name) {
  std::size_t start = 0;
  while (start < name.size()) {
    std::size_t dot = name.find('.', start);
    if (dot == std::string_view::npos) dot = name.size();
    out.push_back(static_cast<std::uint8_t>(dot - start));
    append(out, name.substr(start, dot - start));
    start = dot + 1;
  }
  out.push_back(0);
}

Bytes dns_payload(std::size_t max_payload, RandomSource& rng) {
  const bool response = rng.bernoulli(0.5);
  const std::array<std::uint16_t, 4> kTypes = {1, 28, 15, 16};
  const std::uint16_t qtype = pick(kTypes, rng);
  Bytes msg;
  put_be16(msg, static_cast<std::uint16_t>(rng.uniform_below(65536)));
  put_be16(msg, response ? 0x8180 : 0x0100);
  const std::size_t answers = response ? uniform_between(rng, 1, 4) : 0;
  const bool edns = rng.bernoulli(0.6);
  put_be16(msg, 1);
  put_be16(msg, static_cast<std::uint16_t>(answers));
  put_be16(msg, 0);
  put_be16(msg, edns ? 1 : 0);
  put_name(msg, pick(kDnsNames, rng));
  put_be16(msg, qtype);
  put_be16(msg, 1);
  for (std::size_t i = 0; i < answers; ++i) {
    put_be16(msg, 0xC00C);
    put_be16(msg, qtype);
    put_be16(msg, 1);
    put_be32(msg, static_cast<std::uint32_t>(uniform_between(rng, 60, 86400)));
    if (qtype == 1) {
      put_be16(msg, 4);
      msg.insert(msg.end(), {93, 184, static_cast<std::uint8_t>(rng.uniform_below(256)),
                             static_cast<std::uint8_t>(rng.uniform_below(256))});
    } else if (qtype == 28) {
      put_be16(msg, 16);
      msg.insert(msg.end(), {0x26, 0x06, 0x28, 0x00, 0x02, 0x20, 0x00, 0x01, 0x02, 0x48, 0x18,
                             0x93, 0x25, 0xc8, 0x19,
                             static_cast<std::uint8_t>(rng.uniform_below(256))});
    } else if (qtype == 15) {
      const std::string_view mx = "mail.example.org";
      put_be16(msg, static_cast<std::uint16_t>(2 + mx.size() + 2));
      put_be16(msg, static_cast<std::uint16_t>(10 * (i + 1)));
      put_name(msg, mx);
    } else {
      const std::string txt = "v=spf1 include:_spf.example.org ~all";
      put_be16(msg, static_cast<std::uint16_t>(txt.size() + 1));
      msg.push_back(static_cast<std::uint8_t>(txt.size()));
      append(msg, txt);
    }
  }
  if (edns) {
    msg.insert(msg.end(), {0x00, 0x00, 0x29, 0x04, 0xd0, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00});
  }
  Bytes out;
  put_be16(out, static_cast<std::uint16_t>(msg.size()));
  out.insert(out.end(), msg.begin(), msg.end());
  if (out.size() > max_payload) out.resize(max_payload);
  return out;
}

// ------------------------------------------------------- small control ----

Bytes smallctl_payload(RandomSource& rng) {
  switch (rng.uniform_below(10)) {
    case 0: return {0x00};  // TCP keepalive probe
    case 1: return {0x01, 0x00, 0x00, 0x00, 0x0e};  // MariaDB COM_PING
    case 2: return {0x07, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00};  // OK
    case 3: {
      Bytes b;
      append(b, "*1\r\n$4\r\nPING\r\n");
      return b;
    }
    case 4: {
      Bytes b;
      append(b, "+PONG\r\n");
      return b;
    }
    case 5: {
      Bytes b;
      append(b, rng.bernoulli(0.5) ? "NOOP\r\n" : "QUIT\r\n");
      return b;
    }
    case 6: {
      Bytes b;
      append(b, rng.bernoulli(0.5) ? "250 OK\r\n" : "221 2.0.0 Bye\r\n");
      return b;
    }
    case 7: {
      // MariaDB COM_QUERY for a short statement
      constexpr std::array<std::string_view, 4> kQueries = {
          "SELECT 1", "SET autocommit=1", "SELECT option_value FROM wp_options WHERE option_name = 'cron' LIMIT 1",
          "COMMIT"};
      const std::string_view q = pick(kQueries, rng);
      Bytes b;
      const auto len = static_cast<std::uint32_t>(q.size() + 1);
      b.insert(b.end(), {static_cast<std::uint8_t>(len), static_cast<std::uint8_t>(len >> 8),
                         static_cast<std::uint8_t>(len >> 16), 0x00, 0x03});
      append(b, q);
      return b;
    }
    case 8: {
      // Application heartbeat: sequence counter and a mostly-zero status block.
      Bytes b = {0x48, 0x42, 0x00, 0x01};
      put_be32(b, static_cast<std::uint32_t>(rng.uniform_below(100000)));
      b.insert(b.end(), 8, 0x00);
      return b;
    }
    default: {
      Bytes b;
      append(b, "\r\n");
      return b;
    }
  }
}

// ------------------------------------------------------ IP / TCP frame ----

std::uint32_t checksum_add(std::uint32_t sum, ByteView data) {
  for (std::size_t i = 0; i + 1 < data.size(); i += 2) sum += get_be16(data.data() + i);
  if (data.size() % 2 == 1) sum += static_cast<std::uint32_t>(data.back()) << 8;
  return sum;
}

std::uint16_t checksum_fold(std::uint32_t sum) {
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

Bytes tcp_segment(ByteView payload, std::uint16_t server_port, bool from_server, bool timestamps,
                  RandomSource& rng) {
  Bytes tcp;
  const auto ephemeral = static_cast<std::uint16_t>(uniform_between(rng, 32768, 60999));
  put_be16(tcp, from_server ? server_port : ephemeral);
  put_be16(tcp, from_server ? ephemeral : server_port);
  put_be32(tcp, static_cast<std::uint32_t>(rng.next_u64()));
  put_be32(tcp, static_cast<std::uint32_t>(rng.next_u64()));
  tcp.push_back(timestamps ? 0x80 : 0x50);
  tcp.push_back(0x18);  // PSH|ACK
  put_be16(tcp, static_cast<std::uint16_t>(uniform_between(rng, 500, 65535)));
  put_be16(tcp, 0);  // checksum, filled by the caller
  put_be16(tcp, 0);
  if (timestamps) {
    tcp.insert(tcp.end(), {0x01, 0x01, 0x08, 0x0a});
    put_be32(tcp, static_cast<std::uint32_t>(rng.next_u64()));
    put_be32(tcp, static_cast<std::uint32_t>(rng.next_u64()));
  }
  tcp.insert(tcp.end(), payload.begin(), payload.end());
  return tcp;
}

Bytes ipv4_packet(Bytes tcp, RandomSource& rng) {
  Bytes ip;
  const auto total = static_cast<std::uint16_t>(20 + tcp.size());
  ip.insert(ip.end(), {0x45, 0x00});
  put_be16(ip, total);
  put_be16(ip, static_cast<std::uint16_t>(rng.uniform_below(65536)));
  ip.insert(ip.end(), {0x40, 0x00, 64, 6, 0x00, 0x00});
  const std::uint8_t host_a = static_cast<std::uint8_t>(uniform_between(rng, 2, 254));
  ip.insert(ip.end(), {10, 20, 0, 15, 192, 168, static_cast<std::uint8_t>(rng.uniform_below(4)), host_a});
  if (rng.bernoulli(0.5)) std::swap_ranges(ip.begin() + 12, ip.begin() + 16, ip.begin() + 16);
  const std::uint16_t hsum = checksum_fold(checksum_add(0, ip));
  ip[10] = static_cast<std::uint8_t>(hsum >> 8);
  ip[11] = static_cast<std::uint8_t>(hsum);

  std::uint32_t sum = checksum_add(0, ByteView(ip).subspan(12, 8));
  sum += 6 + static_cast<std::uint32_t>(tcp.size());
  const std::uint16_t tsum = checksum_fold(checksum_add(sum, tcp));
  tcp[16] = static_cast<std::uint8_t>(tsum >> 8);
  tcp[17] = static_cast<std::uint8_t>(tsum);
  ip.insert(ip.end(), tcp.begin(), tcp.end());
  return ip;
}

Bytes ipv6_packet(Bytes tcp, RandomSource& rng) {
  Bytes ip = {0x60, 0x00, 0x00, 0x00};
  put_be16(ip, static_cast<std::uint16_t>(tcp.size()));
  ip.insert(ip.end(), {6, 64});
  const std::array<std::uint8_t, 16> server = {0x20, 0x01, 0x0d, 0xb8, 0x00, 0x10, 0, 0,
                                               0,    0,    0,    0,    0,    0,    0, 0x15};
  std::array<std::uint8_t, 16> client = {0x20, 0x01, 0x0d, 0xb8, 0x0a, 0x0b, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  rng.fill(std::span<std::uint8_t>(client).subspan(8));
  const bool swap = rng.bernoulli(0.5);
  ip.insert(ip.end(), (swap ? client : server).begin(), (swap ? client : server).end());
  ip.insert(ip.end(), (swap ? server : client).begin(), (swap ? server : client).end());

  std::uint32_t sum = checksum_add(0, ByteView(ip).subspan(8, 32));
  sum += static_cast<std::uint32_t>(tcp.size()) + 6;
  const std::uint16_t tsum = checksum_fold(checksum_add(sum, tcp));
  tcp[16] = static_cast<std::uint8_t>(tsum >> 8);
  tcp[17] = static_cast<std::uint8_t>(tsum);
  ip.insert(ip.end(), tcp.begin(), tcp.end());
  return ip;
}

std::uint16_t server_port(TrafficFamily family, RandomSource& rng) {
  switch (family) {
    case TrafficFamily::Http: return rng.bernoulli(0.8) ? 80 : 8080;
    case TrafficFamily::Tls: return 443;
    case TrafficFamily::DnsTcp: return 53;
    case TrafficFamily::SmallControl: {
      constexpr std::array<std::uint16_t, 4> kPorts = {3306, 6379, 25, 8006};
      return pick(kPorts, rng);
    }
  }
  return 80;
}

bool parse_weight(std::string_view text, double& out) {
  const std::string s(text);
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

TrafficMix TrafficMix::parse(std::string_view text) {
  TrafficMix mix{0.0, 0.0, 0.0, 0.0};
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view item = text.substr(start, comma - start);
    start = comma + 1;
    if (item.empty()) continue;
    const std::size_t sep = item.find_first_of("=:");
    if (sep == std::string_view::npos) throw Error(Errc::BadWeights, "mix entry without weight: " + std::string(item));
    const std::string_view name = item.substr(0, sep);
    double weight = 0.0;
    if (!parse_weight(item.substr(sep + 1), weight)) {
      throw Error(Errc::BadWeights, "invalid weight in mix entry: " + std::string(item));
    }
    if (name == "http") {
      mix.http = weight;
    } else if (name == "tls") {
      mix.tls = weight;
    } else if (name == "dns-tcp" || name == "dns_tcp") {
      mix.dns_tcp = weight;
    } else if (name == "smallctl") {
      mix.smallctl = weight;
    } else {
      throw Error(Errc::BadWeights, "unknown traffic family: " + std::string(name));
    }
  }
  mix.validate();
  return mix;
}

std::string TrafficMix::to_string() const {
  return fmt::format("http={},tls={},dns-tcp={},smallctl={}", http, tls, dns_tcp, smallctl);
}

void TrafficMix::validate() const {
  for (double w : {http, tls, dns_tcp, smallctl}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::BadWeights, "mix weights must be finite and nonnegative");
  }
  if (!(http + tls + dns_tcp + smallctl > 0.0)) throw Error(Errc::BadWeights, "mix weights sum to zero");
}

Bytes gen_payload(TrafficFamily family, std::size_t max_payload, RandomSource& rng) {
  switch (family) {
    case TrafficFamily::Http:
      return rng.bernoulli(0.5) ? http_request(max_payload, rng) : http_response(max_payload, rng);
    case TrafficFamily::Tls: return tls_payload(max_payload, rng);
    case TrafficFamily::DnsTcp: return dns_payload(max_payload, rng);
    case TrafficFamily::SmallControl: {
      Bytes b = smallctl_payload(rng);
      if (b.size() > max_payload) b.resize(max_payload);
      return b;
    }
  }
  return {};
}

std::vector<Bytes> gen_synthetic_traffic(const TrafficMix& mix, std::size_t count,
                                         RandomSource& rng, std::size_t max_ip_length) {
  mix.validate();
  if (max_ip_length < 160) throw Error(Errc::BadConfig, "max_ip_length must be at least 160");
  const double total = mix.http + mix.tls + mix.dns_tcp + mix.smallctl;
  std::vector<Bytes> packets;
  packets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::array<std::pair<TrafficFamily, double>, 4> weights = {{
        {TrafficFamily::Http, mix.http},
        {TrafficFamily::Tls, mix.tls},
        {TrafficFamily::DnsTcp, mix.dns_tcp},
        {TrafficFamily::SmallControl, mix.smallctl}}};
    const double roll = rng.uniform01() * total;
    double cumulative = 0.0;
    TrafficFamily family = TrafficFamily::Http;
    for (const auto& [candidate, weight] : weights) {
      if (weight <= 0.0) continue;
      family = candidate;
      cumulative += weight;
      if (roll < cumulative) break;
    }
    const bool v6 = rng.bernoulli(0.2);
    const bool timestamps = rng.bernoulli(0.6);
    const std::size_t headers = (v6 ? 40 : 20) + (timestamps ? 32 : 20);
    const Bytes payload = gen_payload(family, max_ip_length - headers, rng);
    const bool from_server = rng.bernoulli(0.5);
    Bytes tcp = tcp_segment(payload, server_port(family, rng), from_server, timestamps, rng);
    packets.push_back(v6 ? ipv6_packet(std::move(tcp), rng) : ipv4_packet(std::move(tcp), rng));
  }
  return packets;
}

}  // namespace fpe::traffic
