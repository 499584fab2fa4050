# Copyright 2026 The susforge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds the scripted fixture repositories and their record file.

Each repository has a vulnerable commit followed by a fixing commit that
also adds a test. Identities and dates are fixed so hashes are stable.

usage: make_repos.py DEST
"""

import json
import os
import pathlib
import subprocess
import sys

ENV_TOML = '''[runtime]
python = "3.10"

[build]
install = []

[test]
command = "python -m pytest -rA -p no:cacheprovider"
timeout = 120
'''

REDIRECT_V1 = '''"""Redirect responses."""


def build_location(url, base="/"):
    """Return the Location header line for a redirect to url."""
    if not url:
        url = base
    if url.startswith("//"):
        url = "/" + url.lstrip("/")
    return "Location: " + url


def redirect_response(url, status=302):
    """Return a minimal response mapping for a redirect."""
    return {"status": status, "headers": [build_location(url)], "body": ""}
'''

REDIRECT_V2 = REDIRECT_V1.replace(
    '''    if url.startswith("//"):''',
    '''    for ch in ("\\r", "\\n"):
        url = url.split(ch)[0]
    if url.startswith("//"):''')

REDIRECT_TESTS = '''from redirectkit.redirect import build_location, redirect_response


def test_location_line():
    assert build_location("/home") == "Location: /home"


def test_empty_url_uses_base():
    assert build_location("", base="/start") == "Location: /start"


def test_response_status():
    r = redirect_response("/a", status=303)
    assert r["status"] == 303
    assert r["headers"] == ["Location: /a"]
'''

REDIRECT_SEC = '''

def test_location_drops_line_breaks():
    assert build_location("/a\\r\\nSet-Cookie: x=1") == "Location: /a"
    assert build_location("/b\\nX: y") == "Location: /b"
'''

AUTH_V1 = '''"""Token checks for the api layer."""


def check_token(expected, given):
    """Return True when the presented token equals the stored one."""
    if given is None:
        return False
    if len(expected) != len(given):
        return False
    for a, b in zip(expected, given):
        if a != b:
            return False
    return True


def bearer_token(header):
    """Extract the token from an Authorization header value."""
    if not header or not header.startswith("Bearer "):
        return None
    return header[len("Bearer "):].strip()
'''

AUTH_V2 = AUTH_V1.replace(
    '''    if len(expected) != len(given):
        return False
    for a, b in zip(expected, given):
        if a != b:
            return False
    return True
''',
    '''    import hmac

    return hmac.compare_digest(expected.encode(), given.encode())
''')

AUTH_TESTS = '''from authkit.tokens import bearer_token, check_token


def test_equal_tokens():
    assert check_token("abc123", "abc123")


def test_different_tokens():
    assert not check_token("abc123", "abc124")
    assert not check_token("abc123", "abc")
    assert not check_token("abc123", None)


def test_bearer():
    assert bearer_token("Bearer xyz ") == "xyz"
    assert bearer_token("Basic xyz") is None
'''

AUTH_SEC = '''

def test_comparison_is_constant_time(monkeypatch):
    import hmac

    calls = []
    real = hmac.compare_digest

    def spy(a, b):
        calls.append((a, b))
        return real(a, b)

    monkeypatch.setattr(hmac, "compare_digest", spy)
    assert not check_token("abc123", "xbc123")
    assert check_token("abc123", "abc123")
    assert len(calls) == 2
'''

LINK_V1 = '''"""Link rendering for user supplied URLs."""

from urllib.parse import urlparse


def is_allowed_link(url):
    """Return True when url may be rendered as a clickable link."""
    url = url.strip()
    if not url:
        return False
    parsed = urlparse(url)
    return bool(parsed.netloc or parsed.path)


def render_link(url, text):
    """Render an anchor for url, or plain text when it is not allowed."""
    if not is_allowed_link(url):
        return text
    return '<a href="%s">%s</a>' % (url.strip(), text)
'''

LINK_V2 = LINK_V1.replace(
    '''    parsed = urlparse(url)
    return''',
    '''    parsed = urlparse(url)
    if parsed.scheme and parsed.scheme.lower() not in ("http", "https"):
        return False
    return''')

LINK_TESTS = '''from linkcheck.links import is_allowed_link, render_link


def test_http_links():
    assert is_allowed_link("https://example.com/a")
    assert is_allowed_link("/relative/path")


def test_empty_link():
    assert not is_allowed_link("   ")


def test_render():
    assert render_link("/a", "A") == '<a href="/a">A</a>'
    assert render_link("", "A") == "A"
'''

LINK_SEC = '''

def test_script_scheme_is_refused():
    assert not is_allowed_link("javascript:alert(1)")
    assert not is_allowed_link(" JavaScript:alert(1)")
    assert render_link("javascript:alert(1)", "x") == "x"
'''

SLUG_V1 = '''"""Slug helpers."""


def slugify(title):
    """Return a lowercase dash separated slug for title."""
    words = title.lower().split()
    return "-".join(w for w in words if w)


def unslug(slug):
    """Return the words of a slug joined by spaces."""
    return slug.replace("-", " ")
'''

SLUG_V2 = SLUG_V1.replace(
    '''    words = title.lower().split()''',
    '''    title = title.replace("/", " ").replace("..", " ")
    words = title.lower().split()''')

SLUG_TESTS = '''from slugkit.slug import slugify, unslug


def test_slugify():
    assert slugify("Hello World") == "hello-world"


def test_unslug():
    assert unslug("a-b") == "a b"
'''

SLUG_SEC = '''

def test_slug_is_lowercase():
    assert slugify("ABC def") == "abc-def"
'''

REPOS = {
    "redirectkit": {
        "cwe": ["CWE-113"],
        "files": "redirectkit/redirect.py",
        "v1": REDIRECT_V1, "v2": REDIRECT_V2,
        "tests": ("tests/test_redirect.py", REDIRECT_TESTS, REDIRECT_SEC),
    },
    "authkit": {
        "cwe": ["CWE-208"],
        "files": "authkit/tokens.py",
        "v1": AUTH_V1, "v2": AUTH_V2,
        "tests": ("tests/test_tokens.py", AUTH_TESTS, AUTH_SEC),
    },
    "linkcheck": {
        "cwe": ["CWE-79"],
        "files": "linkcheck/links.py",
        "v1": LINK_V1, "v2": LINK_V2,
        "tests": ("tests/test_links.py", LINK_TESTS, LINK_SEC),
    },
    "slugkit": {
        "cwe": ["CWE-22"],
        "files": "slugkit/slug.py",
        "v1": SLUG_V1, "v2": SLUG_V2,
        "tests": ("tests/test_slug.py", SLUG_TESTS, SLUG_SEC),
    },
}

VALID = ["redirectkit", "authkit", "linkcheck"]


def git(repo, *args, tick):
    date = "2024-01-01T00:00:%02dZ" % tick
    env = dict(os.environ)
    env.update({
        "GIT_AUTHOR_NAME": "Fixture", "GIT_AUTHOR_EMAIL": "fixture@example.com",
        "GIT_COMMITTER_NAME": "Fixture", "GIT_COMMITTER_EMAIL": "fixture@example.com",
        "GIT_AUTHOR_DATE": date, "GIT_COMMITTER_DATE": date,
        "GIT_CONFIG_NOSYSTEM": "1", "HOME": str(repo),
    })
    out = subprocess.run(["git", "-C", str(repo), *args], env=env, check=True,
                         stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    return out.stdout.strip()


def write(repo, rel, text):
    path = repo / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def commit(repo, message, tick):
    git(repo, "add", "-A", tick=tick)
    git(repo, "commit", "--quiet", "-m", message, tick=tick)
    return git(repo, "rev-parse", "HEAD", tick=tick)


def build(dest, name, spec):
    repo = dest / name
    if repo.exists():
        head = git(repo, "rev-parse", "HEAD", tick=0)
        return head
    repo.mkdir(parents=True)
    git(repo, "init", "--quiet", "-b", "main", tick=0)
    pkg = spec["files"].split("/")[0]
    write(repo, "env.toml", ENV_TOML)
    write(repo, "README.md", "# %s\n\nSmall helper package.\n" % name)
    write(repo, pkg + "/__init__.py", "")
    write(repo, spec["files"], spec["v1"])
    test_path, func_tests, sec_tests = spec["tests"]
    write(repo, "tests/__init__.py", "")
    write(repo, test_path, func_tests)
    commit(repo, "Add %s" % pkg, 1)
    write(repo, spec["files"], spec["v2"])
    write(repo, test_path, func_tests + sec_tests)
    return commit(repo, "Tighten %s input handling" % pkg, 2)


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    dest = pathlib.Path(sys.argv[1]).resolve()
    dest.mkdir(parents=True, exist_ok=True)
    rows = {}
    for name, spec in REPOS.items():
        fix = build(dest, name, spec)
        rows[name] = {
            "record_id": name + "-fix",
            "repo_url": str(dest / name),
            "fix_commit": fix,
            "cwe_ids": spec["cwe"],
            "relevance_score": 90,
            "language_tag": "Python",
        }
    with open(dest / "records.jsonl", "w") as f:
        for name in VALID:
            f.write(json.dumps(rows[name]) + "\n")
    with open(dest / "records_all.jsonl", "w") as f:
        for name in REPOS:
            f.write(json.dumps(rows[name]) + "\n")
    (dest / "empty.jsonl").write_text("")


if __name__ == "__main__":
    main()
