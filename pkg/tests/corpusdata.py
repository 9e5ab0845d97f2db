"""The 20-commit fixture corpus used by pipeline, CLI, and acceptance tests.

Commits are self-contained (full old/new file snapshots) and cover the
template features: added/removed/renamed/deleted files, multi-class files,
inner classes, annotations, exceptions, moves, accessors, enums, supertype
changes, comment elicitation, and non-Java carriers.
"""

from __future__ import annotations

import json
from pathlib import Path


def _f(path_old, path_new, content_old, content_new):
    return {
        "path_old": path_old,
        "path_new": path_new,
        "content_old": content_old,
        "content_new": content_new,
    }


def modified(path, old, new):
    return _f(path, path, old, new)


def added(path, new):
    return _f(None, path, None, new)


def deleted(path, old):
    return _f(path, None, old, None)


COMMITS: list[dict] = []

# 1. a test-case file gains a listener inner class
COMMITS.append({
    "repo": "elastic/elasticsearch",
    "hash": "a1b2c3d40001",
    "message": "add logging listener to lucene based tests",
    "files": [modified(
        "src/test/ElasticsearchLuceneTestCase.java",
        """package org.elasticsearch.test;

public class ElasticsearchLuceneTestCase {
    private int seed;

    public void setupSuite() {
        initRandomness(seed);
    }
}
""",
        """package org.elasticsearch.test;

public class ElasticsearchLuceneTestCase {
    private int seed;

    public void setupSuite() {
        initRandomness(seed);
        listeners.add(new LoggingListener());
    }

    static class LoggingListener {
        void testStarted(String name) {
            log.info(name);
        }
    }
}
""")],
})

# 2. constructor gains varargs
COMMITS.append({
    "repo": "loopj/android-async-http",
    "hash": "a1b2c3d40002",
    "message": "add convenience of variable arguments to RequestParams constructor",
    "files": [modified(
        "http/RequestParams.java",
        """package com.loopj.http;

public class RequestParams {
    private String source;

    public RequestParams(String key) {
        put(key);
    }
}
""",
        """package com.loopj.http;

public class RequestParams {
    private String source;

    public RequestParams(String... keys) {
        put(keys);
    }
}
""")],
})

# 3. a clarifying comment accompanies the change
COMMITS.append({
    "repo": "asterisk/dialer",
    "hash": "a1b2c3d40003",
    "message": "handle callers without callerid so they display as unknown",
    "files": [modified(
        "src/Dialer.java",
        """package pbx;

class Dialer {
    void display(String caller) {
        show(caller);
    }
}
""",
        """package pbx;

class Dialer {
    void display(String caller) {
        // handle callers without callerid so they display as unknown
        show(orUnknown(caller));
    }
}
""")],
})

# 4. an uncommon field name lands in the message verbatim
COMMITS.append({
    "repo": "media/pipeline",
    "hash": "a1b2c3d40004",
    "message": "rename stream field to trackstream",
    "files": [modified(
        "src/Track.java",
        """package media;

class Track {
    private Stream stream;

    Stream current() {
        return stream;
    }
}
""",
        """package media;

class Track {
    private Stream trackstream;

    Stream current() {
        return trackstream;
    }
}
""")],
})

# 5. single-class file gains a no-arg void method
COMMITS.append({
    "repo": "tools/runner",
    "hash": "a1b2c3d40005",
    "message": "add stop method to runner",
    "files": [modified(
        "src/Runner.java",
        """package tools;

public class Runner {
    private boolean running;

    public void start() {
        running = true;
    }
}
""",
        """package tools;

public class Runner {
    private boolean running;

    public void start() {
        running = true;
    }

    public void stop() {
        running = false;
    }
}
""")],
})

# 6. comment-only change: nothing structural to classify
COMMITS.append({
    "repo": "docs/sampler",
    "hash": "a1b2c3d40006",
    "message": "clarify sampling comment",
    "files": [modified(
        "src/Sampler.java",
        """class Sampler {
    int rate;
}
""",
        """// sampling rate is per second
class Sampler {
    int rate;
}
""")],
})

# 7. no Java files at all
COMMITS.append({
    "repo": "infra/build",
    "hash": "a1b2c3d40007",
    "message": "bump gradle wrapper",
    "files": [
        modified("README.md", "# Build\n", "# Build\n\nUse the wrapper.\n"),
        modified("gradle.properties", "version=1.0\n", "version=1.1\n"),
    ],
})

# 8. import swap only
COMMITS.append({
    "repo": "core/collections",
    "hash": "a1b2c3d40008",
    "message": "switch to concurrent map import",
    "files": [modified(
        "src/Registry.java",
        """package core;

import java.util.HashMap;

class Registry {
    Object store;
}
""",
        """package core;

import java.util.concurrent.ConcurrentHashMap;

class Registry {
    Object store;
}
""")],
})

# 9. file rename with a tiny body tweak
COMMITS.append({
    "repo": "web/session",
    "hash": "a1b2c3d40009",
    "message": "rename session holder and relax timeout",
    "files": [_f(
        "src/SessionHolder.java",
        "src/SessionStore.java",
        """package web;

class SessionStore {
    int timeout() {
        return 30;
    }
}
""",
        """package web;

class SessionStore {
    int timeout() {
        return 60;
    }
}
""")],
})

# 10. dead class deleted
COMMITS.append({
    "repo": "legacy/cleanup",
    "hash": "a1b2c3d40010",
    "message": "delete unused LegacyAdapter",
    "files": [deleted(
        "src/LegacyAdapter.java",
        """package legacy;

class LegacyAdapter {
    int version;

    int adapt(int value) {
        return value + version;
    }
}
""")],
})

# 11. brand-new validator class
COMMITS.append({
    "repo": "core/validation",
    "hash": "a1b2c3d40011",
    "message": "introduce InputValidator with basic rules",
    "files": [added(
        "src/InputValidator.java",
        """package core;

public class InputValidator {
    private int maxLength;

    public InputValidator(int maxLength) {
        this.maxLength = maxLength;
    }

    public boolean validate(String input) {
        return input.length() <= maxLength;
    }
}
""")],
})

# 12. test class gains a configuration annotation
COMMITS.append({
    "repo": "spring/testing",
    "hash": "a1b2c3d40012",
    "message": "configure sql script parsing for repository tests",
    "files": [modified(
        "test/RepositoryTest.java",
        """package tests;

class RepositoryTest {
    void checkSave() {
        repo.save(record);
    }
}
""",
        """package tests;

@SqlConfig(commentPrefix = "--")
class RepositoryTest {
    void checkSave() {
        repo.save(record);
    }
}
""")],
})

# 13. reader now declares an exception
COMMITS.append({
    "repo": "io/reader",
    "hash": "a1b2c3d40013",
    "message": "declare IOException from read",
    "files": [modified(
        "src/ChunkReader.java",
        """package io;

class ChunkReader {
    byte[] read(int n) {
        return buffer.take(n);
    }
}
""",
        """package io;

class ChunkReader {
    byte[] read(int n) throws java.io.IOException {
        return buffer.take(n);
    }
}
""")],
})

# 14. statements reordered inside one method
COMMITS.append({
    "repo": "engine/startup",
    "hash": "a1b2c3d40014",
    "message": "initialize cache before handlers",
    "files": [modified(
        "src/Bootstrap.java",
        """package engine;

class Bootstrap {
    void boot() {
        registerHandlers();
        warmCache();
        announceReady();
    }
}
""",
        """package engine;

class Bootstrap {
    void boot() {
        warmCache();
        registerHandlers();
        announceReady();
    }
}
""")],
})

# 15. two classes in one file, both touched
COMMITS.append({
    "repo": "geometry/shapes",
    "hash": "a1b2c3d40015",
    "message": "track dirty state on move and resize",
    "files": [modified(
        "src/Shapes.java",
        """package geom;

class Circle {
    int r;
    void resize(int nr) {
        r = nr;
    }
}

class Square {
    int side;
    void move(int dx) {
        side = side + dx;
    }
}
""",
        """package geom;

class Circle {
    int r;
    boolean dirty;
    void resize(int nr) {
        r = nr;
        dirty = true;
    }
}

class Square {
    int side;
    boolean dirty;
    void move(int dx) {
        side = side + dx;
        dirty = true;
    }
}
""")],
})

# 16. accessor pair added
COMMITS.append({
    "repo": "model/person",
    "hash": "a1b2c3d40016",
    "message": "add age accessors",
    "files": [modified(
        "src/Person.java",
        """package model;

class Person {
    private int age;

    void celebrate() {
        age = age + 1;
    }
}
""",
        """package model;

class Person {
    private int age;

    void celebrate() {
        age = age + 1;
    }

    int getAge() {
        return age;
    }

    void setAge(int v) {
        age = v;
    }
}
""")],
})

# 17. wide-reaching commit across two files
COMMITS.append({
    "repo": "billing/ledger",
    "hash": "a1b2c3d40017",
    "message": "flesh out ledger and audit operations",
    "files": [
        modified(
            "src/Ledger.java",
            """package billing;

class Ledger {
    int balance;
}
""",
            """package billing;

class Ledger {
    int balance;
    void credit(int n) { balance = balance + n; }
    void debit(int n) { balance = balance - n; }
    void clear() { balance = 0; }
    void invert() { balance = -balance; }
}
""",
        ),
        modified(
            "src/Audit.java",
            """package billing;

class Audit {
    int entries;
}
""",
            """package billing;

class Audit {
    int entries;
    void record() { entries = entries + 1; }
    void drop() { entries = entries - 1; }
    void reset() { entries = 0; }
    void doubleUp() { entries = entries * 2; }
}
""",
        ),
    ],
})

# 18. enum gains a constant
COMMITS.append({
    "repo": "net/protocol",
    "hash": "a1b2c3d40018",
    "message": "support SLOW_START mode",
    "files": [modified(
        "src/Mode.java",
        """package net;

enum Mode {
    FAST,
    STEADY;
}
""",
        """package net;

enum Mode {
    FAST,
    STEADY,
    SLOW_START;
}
""")],
})

# 19. class joins a hierarchy
COMMITS.append({
    "repo": "vehicles/fleet",
    "hash": "a1b2c3d40019",
    "message": "make Car extend Vehicle with an engine",
    "files": [modified(
        "src/Car.java",
        """package fleet;

class Car {
    int wheels;
}
""",
        """package fleet;

class Car extends Vehicle {
    int wheels;
    Engine engine;
}
""")],
})

# 20. mixed commit: visibility change, retype, and a doc file
COMMITS.append({
    "repo": "platform/api",
    "hash": "a1b2c3d40020",
    "message": "narrow worker visibility and widen the counter",
    "files": [
        modified(
            "src/Worker.java",
            """package platform;

public class Worker {
    int processed;

    public void drain() {
        processed = processed + 1;
    }
}
""",
            """package platform;

public class Worker {
    long processed;

    private void drain() {
        processed = processed + 1;
    }
}
""",
        ),
        modified("CHANGELOG.md", "## 1.0\n", "## 1.1\n- internals\n"),
    ],
})


def write_corpus(path: str | Path) -> Path:
    path = Path(path)
    lines = [json.dumps(commit, ensure_ascii=False, sort_keys=True) for commit in COMMITS]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def write_corpus_with_bad_record(path: str | Path) -> Path:
    """Same corpus plus one malformed line (for exit-code tests)."""
    path = Path(path)
    lines = [json.dumps(commit, ensure_ascii=False, sort_keys=True) for commit in COMMITS[:5]]
    lines.insert(2, '{"repo": "broken", "hash": "x"')  # truncated JSON
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path
